#include "stit/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "stit/error.hpp"

namespace stit {

namespace {

using nlohmann::ordered_json;

void reject_unknown(const ordered_json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

MeasureConfig parse_measure(const ordered_json& j) {
  reject_unknown(j, {"kind", "gamma", "dim", "atoms"}, "measure");
  MeasureConfig m;
  read(j, "kind", m.kind);
  read(j, "gamma", m.gamma);
  read(j, "dim", m.dim);
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      reject_unknown(a, {"direction", "weight"}, "measure.atoms[]");
      const auto dir = a.at("direction").get<std::vector<double>>();
      Vec v(static_cast<int>(dir.size()));
      for (std::size_t i = 0; i < dir.size(); ++i) v(static_cast<int>(i)) = dir[i];
      if (!(v.norm() > 0.0)) throw ConfigError("measure.atoms[]: zero direction");
      m.atoms.push_back({Direction::normalized(v), a.at("weight").get<double>()});
    }
  }
  return m;
}

}  // namespace

DirectionalDistribution MeasureConfig::theta() const {
  if (kind == "isotropic") return DirectionalDistribution::isotropic(dim);
  if (kind == "axis_parallel") return DirectionalDistribution::axis_parallel(dim);
  if (kind == "discrete") return DirectionalDistribution::discrete_unchecked(atoms);
  throw ConfigError("measure.kind: unknown kind '" + kind + "'");
}

HyperplaneMeasure MeasureConfig::build() const { return HyperplaneMeasure(gamma, theta()); }

RunConfig parse_config(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    reject_unknown(j,
                   {"experiment", "measure", "a", "b", "t", "s", "replicates", "seed", "threads",
                    "output_dir", "b_grid", "us", "vs", "probes_per_side", "margin"},
                   "config");
    RunConfig c;
    read(j, "experiment", c.experiment);
    if (j.contains("measure")) c.measure = parse_measure(j.at("measure"));
    read(j, "a", c.a);
    read(j, "b", c.b);
    read(j, "t", c.t);
    read(j, "s", c.s);
    read(j, "replicates", c.replicates);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "output_dir", c.output_dir);
    read(j, "b_grid", c.b_grid);
    read(j, "us", c.us);
    read(j, "vs", c.vs);
    read(j, "probes_per_side", c.probes_per_side);
    read(j, "margin", c.margin);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const RunConfig& c, bool require_valid_measure) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const auto& m = c.measure;
  require(m.kind == "isotropic" || m.kind == "axis_parallel" || m.kind == "discrete",
          "measure.kind must be isotropic, axis_parallel or discrete");
  require(m.dim >= 2 && m.dim <= 4, "measure.dim must be in 2..4");
  require(std::isfinite(m.gamma) && m.gamma > 0.0, "measure.gamma must be positive");
  require(m.kind == "discrete" || m.atoms.empty(), "measure.atoms only apply to kind discrete");
  for (const auto& atom : m.atoms) {
    require(atom.direction.dim() == m.dim, "measure.atoms[]: direction dimension differs from dim");
  }
  if (m.kind == "discrete") require(!m.atoms.empty(), "measure.atoms: at least one atom needed");
  require(c.a > 0.0 && c.a < c.b, "need 0 < a < b (got a=" + std::to_string(c.a) +
                                      ", b=" + std::to_string(c.b) + ")");
  require(c.s > 0.0 && c.s < c.t, "need 0 < s < t");
  require(c.replicates >= 1, "replicates must be >= 1");
  require(c.threads >= 0, "threads must be >= 0");
  require(!c.output_dir.empty(), "output_dir must not be empty");
  require(c.b_grid.size() >= 2, "b_grid needs at least two values");
  for (std::size_t k = 0; k < c.b_grid.size(); ++k) {
    require(c.b_grid[k] > c.a && (k == 0 || c.b_grid[k] > c.b_grid[k - 1]),
            "b_grid must increase and exceed a");
  }
  require(!c.us.empty() && !c.vs.empty(), "us and vs must be nonempty");
  for (double u : c.us) require(u > 0.0, "us must be positive");
  for (double v : c.vs) require(v > 0.0, "vs must be positive");
  require(c.probes_per_side >= 1, "probes_per_side must be >= 1");
  require(c.margin > 1.0, "margin must exceed 1");
  if (require_valid_measure) {
    const auto problems = m.theta().violations();
    if (!problems.empty()) throw ConfigError("measure: " + problems.front());
  }
}

std::string config_json(const RunConfig& c) {
  ordered_json m;
  m["kind"] = c.measure.kind;
  m["gamma"] = c.measure.gamma;
  m["dim"] = c.measure.dim;
  if (!c.measure.atoms.empty()) {
    m["atoms"] = ordered_json::array();
    for (const auto& a : c.measure.atoms) {
      std::vector<double> d(a.direction.vec().data(), a.direction.vec().data() + a.direction.dim());
      m["atoms"].push_back({{"direction", d}, {"weight", a.weight}});
    }
  }
  ordered_json j;
  j["experiment"] = c.experiment;
  j["measure"] = m;
  j["a"] = c.a;
  j["b"] = c.b;
  j["t"] = c.t;
  j["s"] = c.s;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["b_grid"] = c.b_grid;
  j["us"] = c.us;
  j["vs"] = c.vs;
  j["probes_per_side"] = c.probes_per_side;
  j["margin"] = c.margin;
  return j.dump(2) + "\n";
}

}  // namespace stit
