#include "stit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "json.hpp"

#include "stit/error.hpp"

namespace stit {

namespace {

using nlohmann::ordered_json;

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i) + 0.0);  // no "-0.0"
  return a;
}

// Facet indices in output order. In 2D, facet k is the edge from vertex k to
// vertex k+1, which is the order Polytope::polygon rebuilds them in.
std::vector<std::size_t> facet_order(const Polytope& p) {
  const auto& facets = p.facets();
  std::vector<std::size_t> order;
  const std::size_t nv = p.vertices().size();
  if (p.dim() == 2 && facets.size() == nv) {
    for (std::size_t k = 0; k < nv; ++k) {
      const auto a = p.incidence(k);
      const auto b = p.incidence((k + 1) % nv);
      for (int f : a) {
        if (std::find(b.begin(), b.end(), f) != b.end()) {
          order.push_back(static_cast<std::size_t>(f));
          break;
        }
      }
    }
    if (order.size() == nv) return order;
    order.clear();
  }
  for (std::size_t i = 0; i < facets.size(); ++i) order.push_back(i);
  return order;
}

ordered_json polytope_value(const Polytope& p) {
  ordered_json j;
  j["dim"] = p.dim();
  j["vertices"] = ordered_json::array();
  for (const Vec& v : p.vertices()) j["vertices"].push_back(vec_json(v));
  j["facets"] = ordered_json::array();
  for (std::size_t i : facet_order(p)) {
    const Facet& f = p.facets()[i];
    j["facets"].push_back(
        {{"normal", vec_json(f.normal)}, {"offset", f.offset + 0.0}, {"tag", f.tag.to_string()}});
  }
  return j;
}

FacetTag parse_tag(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw DomainError("bad facet tag '" + s + "'");
  const std::string kind = s.substr(0, colon);
  const std::uint64_t index = std::stoull(s.substr(colon + 1));
  if (kind == "window") return FacetTag::window(index);
  if (kind == "cut") return FacetTag::cut(index);
  throw DomainError("bad facet tag '" + s + "'");
}

Polytope polygon_from(const ordered_json& j) {
  if (j.at("dim").get<int>() != 2) throw DomainError("only 2D tessellations can be read back");
  std::vector<Vec> ccw;
  for (const auto& v : j.at("vertices")) ccw.push_back(make_vec({v.at(0).get<double>(), v.at(1).get<double>()}));
  // Edge k (vertex k to k+1) takes the tag of the facet through both ends.
  std::vector<FacetTag> tags(ccw.size());
  for (std::size_t k = 0; k < ccw.size(); ++k) {
    const Vec& p = ccw[k];
    const Vec& q = ccw[(k + 1) % ccw.size()];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : j.at("facets")) {
      const Vec n = make_vec({f.at("normal").at(0).get<double>(), f.at("normal").at(1).get<double>()});
      const double off = f.at("offset").get<double>();
      const double err = std::abs(n.dot(p) - off) + std::abs(n.dot(q) - off);
      if (err < best) {
        best = err;
        tags[k] = parse_tag(f.at("tag").get<std::string>());
      }
    }
    if (!(best < 1e-6)) throw DomainError("edge without a matching facet");
  }
  return Polytope::polygon(std::move(ccw), std::move(tags));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

std::string polytope_json(const Polytope& p) { return polytope_value(p).dump(); }

std::string tessellation_json(const Tessellation& t) {
  ordered_json j;
  j["format"] = "stit-tessellation/1";
  j["window"] = polytope_value(t.window);
  j["cells"] = ordered_json::array();
  for (const Polytope& c : t.cells) j["cells"].push_back(polytope_value(c));
  return j.dump(1);
}

std::string snapshot_json(const TessellationState& state) {
  ordered_json j;
  j["format"] = "stit-snapshot/1";
  j["clock"] = state.clock();
  j["zeta"] = state.zeta();
  j["pruned"] = state.pruned();
  j["window"] = polytope_value(state.window());
  j["zero_cell"] = state.zero_cell_id() ? ordered_json(*state.zero_cell_id()) : ordered_json(nullptr);
  j["cells"] = ordered_json::array();
  for (const Cell* c : state.live_cells()) {
    j["cells"].push_back({{"id", c->id}, {"lambda", c->lambda}, {"polytope", polytope_value(c->polytope)}});
  }
  j["jumps"] = ordered_json::array();
  for (const JumpRecord& r : state.jump_log()) {
    j["jumps"].push_back({{"id", r.jump_id},
                          {"time", r.time},
                          {"parent", r.parent},
                          {"normal", vec_json(r.hyperplane.normal().vec())},
                          {"offset", r.hyperplane.offset()},
                          {"plus", r.plus_child},
                          {"minus", r.minus_child},
                          {"zeta_after", r.zeta_after}});
  }
  return j.dump(1);
}

Tessellation tessellation_from_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    const std::string format = j.at("format").get<std::string>();
    Tessellation t{polygon_from(j.at("window")), {}};
    if (format == "stit-tessellation/1") {
      for (const auto& c : j.at("cells")) t.cells.push_back(polygon_from(c));
    } else if (format == "stit-snapshot/1") {
      for (const auto& c : j.at("cells")) t.cells.push_back(polygon_from(c.at("polytope")));
    } else {
      throw DomainError("unknown format '" + format + "'");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed tessellation JSON: ") + e.what());
  }
}

void write_svg(std::ostream& out, const Tessellation& t, const SvgOptions& options) {
  if (t.window.empty() || t.window.dim() != 2) throw DomainError("write_svg: need a 2D window");
  double lo_x = t.window.vertices()[0](0), hi_x = lo_x;
  double lo_y = t.window.vertices()[0](1), hi_y = lo_y;
  for (const Vec& v : t.window.vertices()) {
    lo_x = std::min(lo_x, v(0));
    hi_x = std::max(hi_x, v(0));
    lo_y = std::min(lo_y, v(1));
    hi_y = std::max(hi_y, v(1));
  }
  const double pad = 0.02 * std::max(hi_x - lo_x, hi_y - lo_y);
  const double span = std::max(hi_x - lo_x, hi_y - lo_y) + 2.0 * pad;
  const double scale = options.size_px / span;
  auto px = [&](const Vec& v) {
    return fmt((v(0) - lo_x + pad) * scale) + "," + fmt((hi_y + pad - v(1)) * scale);
  };
  auto points = [&](const Polytope& p) {
    std::string s;
    for (const Vec& v : p.vertices()) {
      if (!s.empty()) s += ' ';
      s += px(v);
    }
    return s;
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" "
         "\"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.size_px
      << "\" height=\"" << options.size_px << "\" viewBox=\"0 0 " << options.size_px << ' '
      << options.size_px << "\">\n";
  out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << fmt(options.stroke_px)
      << "\" stroke-linejoin=\"round\">\n";
  const Vec origin = Vec::Zero(2);
  for (const Polytope& c : t.cells) {
    const bool zero = options.shade_zero_cell && c.contains(origin, 0.0);
    out << "<polygon points=\"" << points(c) << '"';
    if (zero) out << " fill=\"#d9d9d9\"";
    out << "/>\n";
  }
  out << "<polygon points=\"" << points(t.window) << "\" stroke-width=\""
      << fmt(2.0 * options.stroke_px) << "\"/>\n";
  out << "</g>\n</svg>\n";
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace stit
