#include "stit/verify.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "stit/error.hpp"
#include "stit/io.hpp"
#include "stit/mixing.hpp"
#include "stit/nesting.hpp"
#include "stit/parallel.hpp"
#include "stit/simulator.hpp"

namespace stit {

namespace {

// Stream roles for the battery, one per check.
constexpr std::uint64_t kRoleInvariants = 1;
constexpr std::uint64_t kRoleOverlaps = 2;
constexpr std::uint64_t kRoleLifetime = 3;
constexpr std::uint64_t kRoleConsistency = 4;
constexpr std::uint64_t kRoleStit = 5;
constexpr std::uint64_t kRoleEncapsulation = 6;
constexpr std::uint64_t kRoleChi = 7;
constexpr std::uint64_t kRoleZeta = 8;

std::uint64_t seed_for(std::uint64_t master, std::uint64_t role, int attempt) {
  return splitmix64(master ^ (role << 32) ^ static_cast<std::uint64_t>(attempt));
}

bool zero_cell_only(const Polytope& p) { return p.contains(Vec::Zero(p.dim()), 0.0); }

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

CheckResult hard(std::string name, bool ok, double value, double reference, std::string detail) {
  return {std::move(name), true, ok ? CheckStatus::kPass : CheckStatus::kFail, value, reference,
          0, 1, std::move(detail)};
}

// Outcome of one attempt of a statistical check.
struct Attempt {
  bool ok;
  double value;
  double reference;
  std::string detail;
};

CheckResult soft(std::string name, std::size_t n, const BatteryOptions& options,
                 const std::function<Attempt(std::size_t, int)>& run) {
  if (n < options.min_statistical_n) {
    return {std::move(name), false, CheckStatus::kSkipped, std::nan(""), std::nan(""), n, 0,
            "N=" + std::to_string(n) + " below " + std::to_string(options.min_statistical_n)};
  }
  Attempt a = run(n, 0);
  int attempts = 1;
  if (!a.ok && options.retry_soft) {
    n *= 2;
    a = run(n, 1);
    attempts = 2;
  }
  return {std::move(name), false, a.ok ? CheckStatus::kPass : CheckStatus::kFail, a.value,
          a.reference, n, attempts, std::move(a.detail)};
}

CheckResult skipped(std::string name, bool is_hard, const std::string& why) {
  return {std::move(name), is_hard, CheckStatus::kSkipped, std::nan(""), std::nan(""), 0, 0, why};
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment helpers

Proportion no_division_probability(const HyperplaneMeasure& m, const Window& inner,
                                   const Window& outer, double t, std::size_t n,
                                   std::uint64_t master_seed, int threads) {
  if (!(inner.half_side < outer.half_side)) throw DomainError("no_division_probability: need W' in W");
  const auto intact = parallel_map(n, threads, [&](std::size_t i) -> int {
    EncapsulationDetector det(inner, outer);
    SimulatorOptions opts;
    opts.keep_cell = zero_cell_only;
    opts.record_log = false;
    StitSimulator sim(m, outer.polytope(), RandomStream(master_seed, i), opts);
    sim.add_observer(&det);
    sim.run_until(t);
    return det.record().inner_intact;
  });
  std::size_t hits = 0;
  for (int v : intact) hits += v;
  return proportion(hits, n);
}

Proportion encapsulation_probability(const HyperplaneMeasure& m, double a, double b, double s,
                                     std::size_t n, std::uint64_t master_seed, int threads) {
  if (!(a > 0.0) || !(a < b)) throw DomainError("encapsulation_probability: need 0 < a < b");
  const int dim = m.dim();
  const auto hit = parallel_map(n, threads, [&](std::size_t i) -> int {
    EncapsulationDetector det(Window(a, dim), Window(b, dim));
    SimulatorOptions opts;
    opts.keep_cell = zero_cell_only;
    opts.record_log = false;
    StitSimulator sim(m, Window(b, dim).polytope(), RandomStream(master_seed, i), opts);
    sim.add_observer(&det);
    sim.run_until(s);
    return det.encapsulated_before(s);
  });
  std::size_t hits = 0;
  for (int v : hit) hits += v;
  return proportion(hits, n);
}

double encapsulation_lower_bound(const HyperplaneMeasure& m, double a, double b, double s) {
  const int dim = m.dim();
  const double lambda_inner = lambda_hit(m, Window(a, dim).polytope());
  return std::exp(-s * lambda_inner) * std::pow(-std::expm1(-s * big_L(m, a, b)), 2 * dim);
}

InvariantSweep invariant_sweep(const HyperplaneMeasure& m, const Window& w, double t,
                               std::size_t n, std::uint64_t master_seed, int threads) {
  struct One {
    std::size_t jumps;
    std::string error;
  };
  const auto runs = parallel_map(n, threads, [&](std::size_t i) {
    RandomStream rng(master_seed, i);
    const auto st = simulate(m, w, t, rng);
    try {
      check_invariants(m, st);
      return One{st.jump_count(), {}};
    } catch (const InternalError& e) {
      return One{st.jump_count(), "replicate " + std::to_string(i) + ": " + e.what()};
    }
  });
  InvariantSweep out;
  out.trajectories = n;
  for (const auto& r : runs) {
    out.jumps += r.jumps;
    if (!r.error.empty()) {
      if (out.failures++ == 0) out.first_failure = r.error;
    }
  }
  return out;
}

std::size_t separating_overlaps(const HyperplaneMeasure& m, double a, double b, std::size_t n,
                                std::uint64_t master_seed) {
  const int dim = m.dim();
  const Window inner(a, dim), outer(b, dim);
  const Polytope wb = outer.polytope();
  std::vector<std::vector<Vec>> fi, fo;
  for (int i = 0; i < 2 * dim; ++i) {
    fi.push_back(inner.facet_vertices(i));
    fo.push_back(outer.facet_vertices(i));
  }
  RandomStream rng(master_seed, 0);
  std::size_t overlaps = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Hyperplane h = sample_conditional(m, wb, rng);
    int in = 0;
    for (int i = 0; i < 2 * dim; ++i) in += separates(h, fi[i], fo[i]);
    overlaps += in > 1;
  }
  return overlaps;
}

std::vector<DominationRow> birth_chain_domination(std::span<const double> zeta, double q, double t,
                                                  std::span<const double> ms) {
  std::vector<double> scaled;
  scaled.reserve(zeta.size());
  for (double z : zeta) scaled.push_back(z / q);
  std::vector<DominationRow> out;
  for (double M : ms) {
    const auto tail = zeta_tail_from_samples(scaled, M, 1);
    out.push_back({M, tail.p_hat, tail.stderr_p, birth_chain_tail(q, t, M)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Battery

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass:
      return "PASS";
    case CheckStatus::kFail:
      return "FAIL";
    case CheckStatus::kSkipped:
      return "SKIPPED";
  }
  return "?";
}

std::vector<CheckResult> run_battery(const RunConfig& c, const BatteryOptions& options) {
  validate(c, false);
  std::vector<CheckResult> out;
  const int dim = c.measure.dim;
  const Window inner(c.a, dim), outer(c.b, dim);

  const auto problems = c.measure.theta().violations();
  {
    std::string detail;
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
    out.push_back(hard("theta: probability, evenness, non-degeneracy", problems.empty(),
                       static_cast<double>(problems.size()), 0.0, detail.empty() ? "ok" : detail));
  }
  if (!problems.empty()) {
    const std::pair<const char*, bool> rest[] = {
        {"hitting: scaling identity", true},
        {"separating: scaling identities", true},
        {"separating: disjoint classes", true},
        {"stit: zeta monotone, volume conserved", true},
        {"lemma3: inequality chain (closed form)", true},
        {"birth chain: first moment", true},
        {"lifetime: no-division probability", false},
        {"consistency: KS", false},
        {"stit property: KS", false},
        {"encapsulation: lower bound", false},
        {"lemma3: Monte Carlo triple", false},
        {"birth chain: domination", false},
    };
    for (const auto& [name, is_hard] : rest) out.push_back(skipped(name, is_hard, "invalid measure"));
    return out;
  }
  const HyperplaneMeasure m = c.measure.build();
  const std::size_t n = c.replicates;
  const double lambda_inner = lambda_hit(m, inner.polytope());

  // Hitting measure: Lambda([rK]) = r Lambda([K]), and Cauchy's formula for
  // the isotropic planar model.
  {
    double worst = 0.0;
    for (double r : {2.0, 3.0, 10.0}) {
      const double lhs = lambda_hit(m, inner.scaled(r).polytope());
      worst = std::max(worst, std::abs(lhs - r * lambda_inner) / (r * lambda_inner));
    }
    if (c.measure.kind == "isotropic" && dim == 2) {
      const double cauchy = m.gamma() / (2.0 * std::numbers::pi) * inner.polytope().perimeter();
      worst = std::max(worst, std::abs(lambda_inner - cauchy) / cauchy);
    }
    out.push_back(hard("hitting: scaling identity", worst <= 1e-9, worst, 1e-9, "max relative error"));
  }

  double L = 0.0;
  try {
    L = big_L(m, c.a, c.b);
    const auto base = separating_family(m, c.a, c.b);
    double worst = 0.0;
    bool superadditive = true;
    for (double r : {2.0, 3.0, 10.0}) {
      const auto scaled = separating_family(m, r * c.a, r * c.b);
      const auto wide = separating_family(m, c.a, r * c.b);
      for (std::size_t i = 0; i < base.per_facet.size(); ++i) {
        worst = std::max(worst, std::abs(scaled.per_facet[i] - r * base.per_facet[i]) /
                                    std::max(1e-300, r * base.per_facet[i]));
        superadditive = superadditive && wide.per_facet[i] >= r * base.per_facet[i] - 1e-9;
      }
    }
    out.push_back(hard("separating: scaling identities", worst <= 1e-9 && superadditive, worst, 1e-9,
                       std::string("L(a,b)=") + num(L) +
                           (superadditive ? "" : "; Lambda(G_i(a,rb)) < r Lambda(G_i(a,b))")));
  } catch (const AssumptionFailed& e) {
    out.push_back(hard("separating: scaling identities", false, 0.0, 0.0, e.what()));
  }
  {
    const std::size_t k = separating_overlaps(m, c.a, c.b, 10000, seed_for(c.seed, kRoleOverlaps, 0));
    out.push_back(hard("separating: disjoint classes", k == 0, static_cast<double>(k), 0.0,
                       "hyperplanes in two or more G_i out of 10000"));
  }
  {
    const std::size_t runs = std::min(n, options.max_invariant_runs);
    const auto sweep = invariant_sweep(m, inner, c.t, runs, seed_for(c.seed, kRoleInvariants, 0), c.threads);
    out.push_back(hard("stit: zeta monotone, volume conserved", sweep.failures == 0,
                       static_cast<double>(sweep.failures), 0.0,
                       sweep.failures ? sweep.first_failure
                                      : std::to_string(sweep.jumps) + " jumps in " +
                                            std::to_string(sweep.trajectories) + " trajectories"));
    out.back().n = runs;
  }
  {
    const auto ex = chi_no_jump_exact(lambda_inner, c.s);
    const double slack = 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
    const bool ok = ex.chi_t <= ex.ratio * slack && ex.ratio <= slack / ex.chi_t_minus_s;
    out.push_back(hard("lemma3: inequality chain (closed form)", ok, ex.ratio, 1.0 / ex.chi_t_minus_s,
                       "chi(t)=" + num(ex.chi_t) + " <= ratio=" + num(ex.ratio) +
                           " <= 1/chi(t-s)=" + num(1.0 / ex.chi_t_minus_s)));
  }
  {
    const double q = lambda_inner;
    const double v = birth_chain_moment(q, c.t, 1);
    const double ref = std::exp(q * c.t);
    out.push_back(hard("birth chain: first moment", std::abs(v - ref) <= 1e-10 * ref, v, ref,
                       "E B_t = e^{qt}"));
  }

  out.push_back(soft("lifetime: no-division probability", n, options, [&](std::size_t nn, int k) {
    const auto p = no_division_probability(m, inner, outer, c.t, nn, seed_for(c.seed, kRoleLifetime, k), c.threads);
    const double ref = std::exp(-c.t * lambda_inner);
    const double sigma = std::sqrt(ref * (1.0 - ref) / static_cast<double>(nn));
    return Attempt{std::abs(p.p - ref) <= 3.0 * sigma, p.p, ref, "3 sigma = " + num(3.0 * sigma)};
  }));
  out.push_back(soft("consistency: KS", n, options, [&](std::size_t nn, int k) {
    const auto r = consistency_test(m, outer, inner, c.t, nn, seed_for(c.seed, kRoleConsistency, k), c.threads);
    return Attempt{r.min_p() > 0.01, r.min_p(), 0.01, "min p over " + std::to_string(r.rows.size()) + " statistics"};
  }));
  out.push_back(soft("stit property: KS", n, options, [&](std::size_t nn, int k) {
    const auto r = stit_property_test(m, inner, c.t, c.s, nn, seed_for(c.seed, kRoleStit, k), c.threads);
    return Attempt{r.min_p() > 0.01, r.min_p(), 0.01, "min p over " + std::to_string(r.rows.size()) + " statistics"};
  }));
  if (L > 0.0) {
    out.push_back(soft("encapsulation: lower bound", n, options, [&](std::size_t nn, int k) {
      const auto p = encapsulation_probability(m, c.a, c.b, c.s, nn, seed_for(c.seed, kRoleEncapsulation, k), c.threads);
      const double rhs = encapsulation_lower_bound(m, c.a, c.b, c.s);
      // sigma at the boundary of the one-sided hypothesis.
      const double sigma = std::max(p.stderr_p, std::sqrt(rhs * (1.0 - rhs) / static_cast<double>(nn)));
      return Attempt{p.p >= rhs - 3.0 * sigma, p.p, rhs, "sigma " + num(sigma)};
    }));
  } else {
    out.push_back(skipped("encapsulation: lower bound", false, "L(a,b) = 0"));
  }
  out.push_back(soft("lemma3: Monte Carlo triple", n, options, [&](std::size_t nn, int k) {
    const auto r = chi_no_jump_case(m, inner, c.t, c.s, nn, seed_for(c.seed, kRoleChi, k));
    const bool ok = std::abs(r.monte_carlo.chi_t - r.exact.chi_t) <= 3.0 * r.stderr_mc.chi_t + 1e-15 &&
                    std::abs(r.monte_carlo.chi_t_minus_s - r.exact.chi_t_minus_s) <=
                        3.0 * r.stderr_mc.chi_t_minus_s &&
                    std::abs(r.monte_carlo.ratio - r.exact.ratio) <= 3.0 * r.stderr_mc.ratio;
    return Attempt{ok, r.monte_carlo.chi_t_minus_s, r.exact.chi_t_minus_s,
                   "chi(t-s) stderr " + num(r.stderr_mc.chi_t_minus_s)};
  }));
  out.push_back(soft("birth chain: domination", n, options, [&](std::size_t nn, int k) {
    const auto z = sample_zeta(m, inner, c.t, nn, seed_for(c.seed, kRoleZeta, k), c.threads);
    const double ms[] = {1.5, 2.0, 3.0, 5.0, 8.0};
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& row : birth_chain_domination(z, lambda_inner, c.t, ms)) {
      ok = ok && row.p_hat <= row.chain_tail + 3.0 * row.stderr_p;
      worst = std::max(worst, row.p_hat - row.chain_tail);
    }
    return Attempt{ok, worst, 0.0, "max of P^(zeta/q >= M) - P(B_t >= M) over M"};
  }));
  return out;
}

bool battery_passed(std::span<const CheckResult> results) {
  for (const auto& r : results) {
    if (r.status == CheckStatus::kFail) return false;
  }
  return true;
}

void write_csv(std::ostream& out, std::span<const CheckResult> results) {
  out << "check,kind,status,value,reference,n,attempts,detail\n" << std::setprecision(10);
  for (const auto& r : results) {
    out << csv_field(r.name) << ',' << (r.hard ? "hard" : "soft") << ',' << status_name(r.status)
        << ',' << r.value << ',' << r.reference << ',' << r.n << ',' << r.attempts << ','
        << csv_field(r.detail) << '\n';
  }
}

}  // namespace stit
