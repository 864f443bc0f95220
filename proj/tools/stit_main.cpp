// stit: command-line driver for simulations, bounds, beta estimation and the
// verification battery. Exit codes: 0 ok, 1 runtime error, 2 config error,
// 3 verification failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "stit/config.hpp"
#include "stit/error.hpp"
#include "stit/io.hpp"
#include "stit/mixing.hpp"
#include "stit/nesting.hpp"
#include "stit/parallel.hpp"
#include "stit/simulator.hpp"
#include "stit/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--replicates", o.replicates, "number of replicates N");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

stit::RunConfig resolve(const Overrides& o, bool require_valid_measure) {
  stit::RunConfig c = o.config_path.empty() ? stit::RunConfig{} : stit::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.replicates) c.replicates = *o.replicates;
  if (o.out) c.output_dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  stit::validate(c, require_valid_measure);
  return c;
}

// Single writer per artifact: the file is written once, after all
// replicates have been merged.
void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

fs::path prepare_out(const stit::RunConfig& c) {
  const fs::path dir(c.output_dir);
  fs::create_directories(dir);
  write_file(dir / "config.json", stit::config_json(c));
  return dir;
}

int cmd_simulate(const stit::RunConfig& c) {
  const auto m = c.measure.build();
  const stit::Window w(c.b, c.measure.dim);
  const fs::path dir = prepare_out(c);

  struct Row {
    std::uint64_t jumps;
    double zeta;
    stit::TessellationSummary summary;
  };
  const auto rows = stit::parallel_map(c.replicates, c.threads, [&](std::size_t i) {
    stit::SimulatorOptions opts;
    opts.record_log = false;
    stit::StitSimulator sim(m, w.polytope(), stit::RandomStream(c.seed, i), opts);
    sim.run_until(c.t);
    return Row{sim.state().jump_count(), sim.state().zeta(),
               stit::summarize(stit::to_tessellation(sim.state()))};
  });
  std::ostringstream csv;
  csv << "replicate,cells,jumps,zeta,zero_cell_volume,edge_length\n" << std::setprecision(12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << i << ',' << r.summary.cell_count << ',' << r.jumps << ',' << r.zeta << ','
        << r.summary.zero_cell_volume << ',' << r.summary.edge_length << '\n';
  }
  write_file(dir / "simulate.csv", csv.str());

  // Replicate 0 again with the full jump log for the snapshot.
  stit::RandomStream rng(c.seed, 0);
  const auto state = stit::simulate(m, w, c.t, rng);
  write_file(dir / "snapshot.json", stit::snapshot_json(state) + "\n");
  if (c.measure.dim == 2) {
    std::ostringstream svg;
    stit::write_svg(svg, stit::to_tessellation(state));
    write_file(dir / "tessellation.svg", svg.str());
  }
  std::cout << "simulate: " << rows.size() << " replicates, replicate 0 has "
            << state.live_count() << " cells; wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_bound(const stit::RunConfig& c) {
  const auto m = c.measure.build();
  const int dim = c.measure.dim;
  const fs::path dir = prepare_out(c);
  const auto zeta = stit::sample_zeta(m, stit::Window(c.a, dim), c.t, c.replicates, c.seed, c.threads);
  const double lambda_inner = stit::lambda_hit(m, stit::Window(c.a, dim).polytope());

  std::ostringstream csv;
  csv << "b,u,v,s,M,p_tail,p_tail_stderr,L,lambda_inner,theorem2_raw,theorem2,simplified_raw,"
         "simplified,optimal\n"
      << std::setprecision(12);
  for (double b : c.b_grid) {
    const double L = stit::big_L(m, c.a, b);
    const auto best = stit::optimize_bound(m, c.a, b, c.t, zeta, c.us, c.vs);
    for (double u : c.us) {
      for (double v : c.vs) {
        const double s = std::pow(b, -u);
        const double M = std::pow(b, v);
        if (!(s < c.t)) continue;
        const auto tail = stit::zeta_tail_from_samples(zeta, M, 1);
        const stit::BetaBoundInputs in{c.a, b, c.t, s, M, dim, lambda_inner, L, tail.p_hat};
        const bool optimal = best && best->u == u && best->v == v;
        csv << b << ',' << u << ',' << v << ',' << s << ',' << M << ',' << tail.p_hat << ','
            << tail.stderr_p << ',' << L << ',' << lambda_inner << ','
            << stit::theorem2_bound_raw(in) << ',' << stit::theorem2_bound(in) << ','
            << stit::simplified_bound_raw(in) << ',' << stit::simplified_bound(in) << ','
            << (optimal ? 1 : 0) << '\n';
      }
    }
  }
  write_file(dir / "bound.csv", csv.str());
  std::cout << "bound: " << c.b_grid.size() << " b values; wrote " << (dir / "bound.csv").string()
            << "\n";
  return kExitOk;
}

int cmd_estimate_beta(const stit::RunConfig& c) {
  const auto m = c.measure.build();
  const fs::path dir = prepare_out(c);
  stit::DecayOptions opts;
  opts.us = c.us;
  opts.vs = c.vs;
  opts.per_side = c.probes_per_side;
  opts.margin = c.margin;
  opts.threads = c.threads;
  const auto result = stit::decay_experiment(m, c.a, c.t, c.b_grid, c.replicates, c.seed, opts);
  std::ostringstream csv;
  stit::write_csv(csv, result);
  write_file(dir / "decay.csv", csv.str());
  for (const auto& r : result.rows) {
    std::cout << "b=" << r.b << "  beta_hat=" << r.beta << " +- " << r.beta_stderr;
    if (r.bound) std::cout << "  bound=" << r.bound->value << " (raw " << r.bound->raw << ")";
    std::cout << "\n";
  }
  std::cout << "estimate-beta: beta_hat is a lower estimate (fixed probe partitions); wrote "
            << (dir / "decay.csv").string() << "\n";
  return kExitOk;
}

int cmd_verify(const stit::RunConfig& c) {
  const fs::path dir = prepare_out(c);
  const auto results = stit::run_battery(c);
  for (const auto& r : results) {
    std::cout << std::left << std::setw(8) << stit::status_name(r.status) << std::setw(5)
              << (r.hard ? "hard" : "soft") << ' ' << std::setw(42) << r.name
              << " value=" << r.value << " ref=" << r.reference;
    if (r.n) std::cout << " N=" << r.n;
    if (r.attempts > 1) std::cout << " (retried)";
    std::cout << "  " << r.detail << "\n";
  }
  std::ostringstream csv;
  stit::write_csv(csv, results);
  write_file(dir / "verify.csv", csv.str());
  const bool ok = stit::battery_passed(results);
  std::cout << (ok ? "verify: all checks passed or skipped\n" : "verify: FAILED\n");
  return ok ? kExitOk : kExitVerify;
}

int cmd_render(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw stit::ConfigError("cannot read '" + in_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  stit::Tessellation t;
  try {
    t = stit::tessellation_from_json(buf.str());
  } catch (const stit::DomainError& e) {
    throw stit::ConfigError(e.what());
  }
  const fs::path out(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ostringstream svg;
  stit::write_svg(svg, t);
  write_file(out, svg.str());
  std::cout << "render: " << t.cells.size() << " cells -> " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STIT tessellation simulator and mixing-rate toolkit"};
  app.require_subcommand(1);

  Overrides sim_o, bound_o, beta_o, verify_o;
  auto* simulate = app.add_subcommand("simulate", "simulate Y_t n W; write CSV, JSON snapshot, SVG");
  add_common(simulate, sim_o);
  auto* bound = app.add_subcommand("bound", "evaluate the beta-mixing bounds over the (s, M, b) grid");
  add_common(bound, bound_o);
  auto* beta = app.add_subcommand("estimate-beta", "estimate beta(a,b) over b_grid with bounds");
  add_common(beta, beta_o);
  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  add_common(verify, verify_o);

  std::string render_in, render_out = "tessellation.svg";
  auto* render = app.add_subcommand("render", "render a JSON snapshot or tessellation as SVG 1.1");
  render->add_option("input", render_in, "snapshot or tessellation JSON")->required();
  render->add_option("--out", render_out, "output SVG file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(resolve(sim_o, true));
    if (*bound) return cmd_bound(resolve(bound_o, true));
    if (*beta) return cmd_estimate_beta(resolve(beta_o, true));
    if (*verify) return cmd_verify(resolve(verify_o, false));
    if (*render) return cmd_render(render_in, render_out);
  } catch (const stit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const stit::AssumptionFailed& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
