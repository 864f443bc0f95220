#include "stit/nesting.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "stit/error.hpp"
#include "stit/parallel.hpp"
#include "stit/stats.hpp"

namespace stit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Disjoint stream ids for (sample role, replicate, sub-simulation).
std::uint64_t stream_of(std::uint64_t role, std::uint64_t replicate, std::uint64_t sub) {
  return (role << 48) | (replicate << 20) | sub;
}

Tessellation simulate_in(const HyperplaneMeasure& m, const Polytope& w, double t, RandomStream rng) {
  StitSimulator sim(m, w, rng);
  sim.run_until(t);
  return to_tessellation(sim.state());
}

// Y_t n W' (+) Y'_s: frame simulated in `w` up to t, every frame cell filled
// with an independent Y_s clipped to it.
Tessellation iterated_sample(const HyperplaneMeasure& m, const Polytope& w, double t, double s,
                             std::uint64_t seed, std::uint64_t role, std::uint64_t replicate) {
  const auto frame = number_cells(simulate_in(m, w, t, RandomStream(seed, stream_of(role, replicate, 0))));
  std::vector<Tessellation> rs;
  rs.reserve(frame.cells.size());
  for (std::size_t k = 0; k < frame.cells.size(); ++k) {
    rs.push_back(simulate_clipped(m, w, frame.cells[k], s,
                                  RandomStream(seed, stream_of(role, replicate, k + 1))));
  }
  return iterate(frame, rs);
}

void compare(ComparisonReport& report, const std::string& name,
             const std::vector<TessellationSummary>& x, const std::vector<TessellationSummary>& y) {
  auto column = [](const std::vector<TessellationSummary>& v, double TessellationSummary::*f) {
    std::vector<double> out;
    for (const auto& s : v) {
      if (!std::isnan(s.*f)) out.push_back(s.*f);
    }
    return out;
  };
  const std::pair<const char*, double TessellationSummary::*> stats[] = {
      {"cell_count", &TessellationSummary::cell_count},
      {"zero_cell_area", &TessellationSummary::zero_cell_volume},
      {"edge_length", &TessellationSummary::edge_length},
  };
  for (const auto& [label, field] : stats) {
    const auto a = column(x, field);
    const auto b = column(y, field);
    if (a.empty() || b.empty()) continue;
    const auto r = ks_two_sample(a, b);
    report.rows.push_back({name, label, r.statistic, r.p_value, std::min(a.size(), b.size())});
  }
}

}  // namespace

Tessellation to_tessellation(const TessellationState& state) {
  return {state.window(), state.live_polytopes()};
}

NumberedTessellation number_cells(const Tessellation& t) {
  const std::size_t n = t.cells.size();
  if (n == 0) return {t.window, {}};
  const int dim = t.cells.front().dim();
  std::vector<Vec> ref(n);
  for (std::size_t i = 0; i < n; ++i) ref[i] = t.cells[i].centroid();

  const Vec origin = Vec::Zero(dim);
  std::optional<std::size_t> zero;
  for (std::size_t i = 0; i < n && !zero; ++i) {
    if (t.cells[i].contains(origin, 0.0)) zero = i;
  }

  auto less = [&](std::size_t i, std::size_t j) {
    if (zero && (i == *zero || j == *zero)) return i == *zero && j != *zero;
    const double di = ref[i].norm();
    const double dj = ref[j].norm();
    if (di != dj) return di < dj;
    for (int c = 0; c < dim; ++c) {
      if (ref[i](c) != ref[j](c)) return ref[i](c) < ref[j](c);
    }
    return false;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), less);

  NumberedTessellation out{t.window, {}};
  out.cells.reserve(n);
  for (std::size_t i : order) out.cells.push_back(t.cells[i]);
  return out;
}

Tessellation iterate(const NumberedTessellation& frame, std::span<const Tessellation> rs) {
  if (rs.size() < frame.cells.size()) {
    throw DomainError("iterate: " + std::to_string(rs.size()) + " nested tessellations for " +
                      std::to_string(frame.cells.size()) + " frame cells");
  }
  Tessellation out{frame.window, {}};
  for (std::size_t k = 0; k < frame.cells.size(); ++k) {
    const double vol = frame.cells[k].volume();
    for (const Polytope& c : rs[k].cells) {
      Polytope piece = intersect(c, frame.cells[k]);
      if (!piece.empty() && piece.volume() > 1e-12 * vol) out.cells.push_back(std::move(piece));
    }
  }
  return out;
}

Tessellation rescale(const Tessellation& t, double r) {
  if (!(r > 0.0)) throw DomainError("rescale: factor must be positive");
  Tessellation out{t.window.scaled(r), {}};
  out.cells.reserve(t.cells.size());
  for (const Polytope& c : t.cells) out.cells.push_back(c.scaled(r));
  return out;
}

Tessellation restrict_to(const Tessellation& t, const Polytope& w) {
  Tessellation out{intersect(t.window, w), {}};
  for (const Polytope& c : t.cells) {
    Polytope piece = intersect(c, w);
    if (!piece.empty()) out.cells.push_back(std::move(piece));
  }
  return out;
}

TessellationSummary summarize(const Tessellation& t) {
  TessellationSummary s{static_cast<double>(t.cells.size()), kNaN, kNaN};
  if (t.cells.empty()) return s;
  const int dim = t.cells.front().dim();
  const Vec origin = Vec::Zero(dim);
  for (const Polytope& c : t.cells) {
    if (c.contains(origin, 0.0)) {
      s.zero_cell_volume = c.volume();
      break;
    }
  }
  if (dim == 2) {
    double perim = 0.0;
    for (const Polytope& c : t.cells) perim += c.perimeter();
    s.edge_length = 0.5 * (perim - t.window.perimeter());
  }
  return s;
}

double total_volume(const Tessellation& t) {
  double v = 0.0;
  for (const Polytope& c : t.cells) v += c.volume();
  return v;
}

double ComparisonReport::min_p() const {
  double p = 1.0;
  for (const auto& r : rows) p = std::min(p, r.p_value);
  return p;
}

void write_csv(std::ostream& out, const ComparisonReport& report) {
  out << "comparison,statistic,ks_d,p_value,n\n";
  out << std::setprecision(10);
  for (const auto& r : report.rows) {
    out << '"' << r.comparison << "\"," << r.statistic << ',' << r.ks_d << ',' << r.p_value << ','
        << r.n << '\n';
  }
}

Tessellation simulate_clipped(const HyperplaneMeasure& m, const Polytope& window,
                              const Polytope& region, double t, RandomStream rng) {
  SimulatorOptions opts;
  opts.keep_cell = [&region](const Polytope& p) { return !intersect(p, region).empty(); };
  StitSimulator sim(m, window, rng, opts);
  sim.run_until(t);
  return restrict_to(to_tessellation(sim.state()), region);
}

ComparisonReport stit_property_test(const HyperplaneMeasure& m, const Window& w, double t,
                                    double s, std::size_t n, std::uint64_t master_seed,
                                    int threads) {
  if (!(t > 0.0) || !(s > 0.0)) throw DomainError("stit_property_test: need t, s > 0");
  const Polytope full = w.polytope();
  const Polytope half = w.scaled(0.5).polytope();

  auto run = [&](std::uint64_t role, auto make) {
    return parallel_map(n, threads, [&](std::size_t i) { return summarize(make(role, i)); });
  };
  const auto y_t = run(0, [&](std::uint64_t role, std::size_t i) {
    return simulate_in(m, full, t, RandomStream(master_seed, stream_of(role, i, 0)));
  });
  const auto y_t_control = run(1, [&](std::uint64_t role, std::size_t i) {
    return simulate_in(m, full, t, RandomStream(master_seed, stream_of(role, i, 0)));
  });
  const auto y_2t = run(2, [&](std::uint64_t role, std::size_t i) {
    return rescale(simulate_in(m, half, 2.0 * t, RandomStream(master_seed, stream_of(role, i, 0))),
                   2.0);
  });
  const auto nested_half = run(3, [&](std::uint64_t role, std::size_t i) {
    return rescale(iterated_sample(m, half, t, t, master_seed, role, i), 2.0);
  });
  const auto y_ts = run(4, [&](std::uint64_t role, std::size_t i) {
    return simulate_in(m, full, t + s, RandomStream(master_seed, stream_of(role, i, 0)));
  });
  const auto nested = run(5, [&](std::uint64_t role, std::size_t i) {
    return iterated_sample(m, full, t, s, master_seed, role, i);
  });

  ComparisonReport report;
  compare(report, "control: Y_t vs Y'_t", y_t, y_t_control);
  compare(report, "Y_t vs 2*Y_2t", y_t, y_2t);
  compare(report, "Y_t vs 2*(Y_t (+) Y'_t)", y_t, nested_half);
  compare(report, "Y_t+s vs Y_t (+) Y'_s", y_ts, nested);
  return report;
}

ComparisonReport consistency_test(const HyperplaneMeasure& m, const Window& w,
                                  const Window& inner, double t, std::size_t n,
                                  std::uint64_t master_seed, int threads) {
  if (!(inner.half_side < w.half_side)) throw DomainError("consistency_test: need W' inside W");
  const Polytope full = w.polytope();
  const Polytope small = inner.polytope();
  const auto clipped = parallel_map(n, threads, [&](std::size_t i) {
    RandomStream rng(master_seed, stream_of(0, i, 0));
    return summarize(restrict_to(simulate_in(m, full, t, rng), small));
  });
  const auto direct = parallel_map(n, threads, [&](std::size_t i) {
    RandomStream rng(master_seed, stream_of(1, i, 0));
    return summarize(simulate_in(m, small, t, rng));
  });
  ComparisonReport report;
  compare(report, "(Y_t n W) n W' vs Y_t n W'", clipped, direct);
  return report;
}

}  // namespace stit
