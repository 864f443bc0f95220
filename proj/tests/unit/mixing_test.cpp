#include "stit/mixing.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "stit/error.hpp"
#include "stit/stats.hpp"

namespace stit {
namespace {

HyperplaneMeasure iso() { return HyperplaneMeasure::isotropic(2.0 * std::numbers::pi, 2); }
HyperplaneMeasure axis() { return HyperplaneMeasure::axis_parallel(4.0, 2); }

std::vector<ProbePattern> from_pairs(const std::vector<std::pair<int, int>>& pairs) {
  std::vector<ProbePattern> out;
  for (auto [i, o] : pairs) out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(o)});
  return out;
}

TEST(ProbePartition, GridGeometry) {
  const auto p = ProbePartition::grid(1.0, 3.0);
  ASSERT_EQ(p.inner().size(), 4u);
  ASSERT_EQ(p.outer().size(), 4u);
  EXPECT_DOUBLE_EQ(p.sim_half_side(), 6.0);
  for (const auto& box : p.inner()) EXPECT_NEAR(box.volume(), 0.25, 1e-12);
  for (const auto& box : p.outer()) EXPECT_NEAR(std::abs(box.centroid()(0)), 4.5, 1e-12);
}

TEST(ProbePartition, Validation) {
  EXPECT_THROW(ProbePartition::grid(2.0, 1.0), DomainError);
  EXPECT_THROW(ProbePartition::grid(1.0, 2.0, 2, 5), DomainError);
  const Polytope in = Polytope::box(make_vec({-0.5, -0.5}), make_vec({0.5, 0.5}));
  const Polytope straddling = Polytope::box(make_vec({1.5, -0.5}), make_vec({2.5, 0.5}));
  const Polytope outside_sim = Polytope::box(make_vec({4.5, -0.5}), make_vec({5.5, 0.5}));
  const Polytope good = Polytope::box(make_vec({2.5, -0.5}), make_vec({3.0, 0.5}));
  EXPECT_NO_THROW(ProbePartition(1.0, 2.0, 2.0, {in}, {good}));
  EXPECT_THROW(ProbePartition(1.0, 2.0, 2.0, {in}, {straddling}), DomainError);
  EXPECT_THROW(ProbePartition(1.0, 2.0, 2.0, {in}, {outside_sim}), DomainError);
  EXPECT_THROW(ProbePartition(1.0, 2.0, 2.0, {good}, {good}), DomainError);
}

TEST(BetaFromTable, HandComputed) {
  EXPECT_DOUBLE_EQ(beta_from_table({{1.0, 0.0}, {0.0, 1.0}}), 0.5);
  EXPECT_DOUBLE_EQ(beta_from_table({{7.0}}), 0.0);
  // Product table: row law (0.3,0.7) times column law (0.2,0.5,0.3).
  std::vector<std::vector<double>> prod(2, std::vector<double>(3));
  const double r[] = {0.3, 0.7}, c[] = {0.2, 0.5, 0.3};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) prod[i][j] = 1000.0 * r[i] * c[j];
  }
  EXPECT_NEAR(beta_from_table(prod), 0.0, 1e-15);
  EXPECT_THROW(beta_from_table({{0.0, 0.0}}), EstimationError);
}

TEST(BetaFromPatterns, TrivialPartitionIsZero) {
  const auto pats = from_pairs({{1, 2}, {3, 0}, {0, 1}, {1, 2}});
  BetaOptions opts;
  opts.inner_mask = 0;
  EXPECT_EQ(beta_from_patterns(pats, opts).value, 0.0);
}

TEST(BetaFromPatterns, PerfectCouplingOfTwoAtoms) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < 50; ++k) pairs.push_back({k % 2, k % 2});
  const auto est = beta_from_patterns(from_pairs(pairs));
  EXPECT_DOUBLE_EQ(est.value, 0.5);
  EXPECT_EQ(est.rows, 2u);
  EXPECT_EQ(est.cols, 2u);
}

TEST(BetaFromPatterns, MergesRareAtoms) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < 40; ++k) pairs.push_back({k % 2, 0});
  pairs.push_back({5, 0});
  pairs.push_back({6, 0});
  const auto est = beta_from_patterns(from_pairs(pairs));
  EXPECT_EQ(est.rows, 3u);
  EXPECT_EQ(est.cols, 1u);
}

TEST(BetaFromPatterns, RefinementNeverDecreases) {
  RandomStream rng(81, 0);
  std::vector<ProbePattern> pats;
  for (int k = 0; k < 2000; ++k) {
    const auto i = static_cast<std::uint32_t>(rng.below(16));
    // Outer bits correlated with inner bits 0 and 2.
    std::uint32_t o = static_cast<std::uint32_t>(rng.below(16));
    if (rng.uniform() < 0.3) o = (o & ~5u) | (i & 5u);
    pats.push_back({i, o});
  }
  BetaOptions opts;
  opts.merge_below = 0;
  opts.bootstrap = 0;
  const std::uint32_t chain[] = {0u, 1u, 5u, 7u, 15u};
  for (std::uint32_t om : chain) {
    double prev = -1.0;
    for (std::uint32_t im : chain) {
      opts.inner_mask = im;
      opts.outer_mask = om;
      const double v = beta_from_patterns(pats, opts).value;
      EXPECT_GE(v, prev - 1e-15);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(BetaFromPatterns, BootstrapIsDeterministic) {
  const auto pats = from_pairs({{0, 0}, {1, 1}, {0, 1}, {1, 0}, {0, 0}, {1, 1}, {0, 0}, {1, 1}});
  BetaOptions opts;
  opts.merge_below = 0;
  const auto a = beta_from_patterns(pats, opts);
  const auto b = beta_from_patterns(pats, opts);
  EXPECT_EQ(a.stderr_value, b.stderr_value);
  EXPECT_GT(a.stderr_value, 0.0);
}

TEST(ProbeHits, PrunedMatchesFullSimulation) {
  const auto probes = ProbePartition::grid(1.0, 1.5);
  const std::size_t n = 600;
  std::vector<double> pruned_inner, full_inner, pruned_outer, full_outer;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = simulate_probe_hits(iso(), probes, 0.4, RandomStream(82, i));
    const auto f = probe_hits_full(iso(), probes, 0.4, RandomStream(83, i));
    pruned_inner.push_back(std::popcount(p.inner));
    full_inner.push_back(std::popcount(f.inner));
    pruned_outer.push_back(std::popcount(p.outer));
    full_outer.push_back(std::popcount(f.outer));
  }
  EXPECT_GT(ks_two_sample(pruned_inner, full_inner).p_value, 1e-3);
  EXPECT_GT(ks_two_sample(pruned_outer, full_outer).p_value, 1e-3);
  // Not degenerate: some probes hit, some not.
  EXPECT_GT(mean(full_inner), 0.2);
  EXPECT_LT(mean(full_inner), 3.8);
}

TEST(ProbeHits, SingleProbeHitProbability) {
  // Restricted to the probe the tessellation is Y_t n C, so the probe
  // survives iff no hyperplane hits it: e^{-t Lambda([C])}.
  const double t = 0.3;
  const Polytope in = Polytope::box(make_vec({-0.25, -0.25}), make_vec({0.25, 0.25}));
  const Polytope out = Polytope::box(make_vec({2.5, -0.25}), make_vec({3.0, 0.25}));
  const ProbePartition probes(1.0, 2.0, 2.0, {in}, {out});
  const double miss = std::exp(-t * lambda_hit(axis(), in));
  std::size_t hit = 0;
  const std::size_t n = 4000;
  for (std::size_t i = 0; i < n; ++i) {
    hit += simulate_probe_hits(axis(), probes, t, RandomStream(84, i)).inner & 1u;
  }
  const auto p = proportion(hit, n);
  EXPECT_NEAR(p.p, 1.0 - miss, 4.0 * p.stderr_p);
}

BetaBoundInputs example() {
  // s = 0.1: s Lambda = 0.4, s L = 0.3, s M = 0.2.
  return {1.0, 2.0, 1.0, 0.1, 2.0, 2, 4.0, 3.0, 0.05};
}

TEST(Bound, ExampleClampsToOne) {
  const auto in = example();
  const double e = std::exp(-0.4) * std::pow(1.0 - std::exp(-0.3), 4);
  const double first = 1.0 - e * std::exp(-0.2);
  const double second = std::max(std::exp(0.2) - 1.0, 2.0 - std::exp(-0.2) - e);
  EXPECT_NEAR(first, 0.99752, 1e-5);
  EXPECT_NEAR(second, 1.17824, 1e-5);
  EXPECT_NEAR(theorem2_bound_raw(in), 0.05 + 0.95 * (first + second), 1e-12);
  EXPECT_NEAR(theorem2_bound_raw(in), 2.117, 5e-4);
  EXPECT_EQ(theorem2_bound(in), 1.0);
}

TEST(Bound, SmallSLimitIsVacuous) {
  auto in = example();
  in.s = 1e-12;
  EXPECT_NEAR(theorem2_bound_raw(in), 0.05 + 0.95 * 2.0, 1e-9);
  EXPECT_EQ(theorem2_bound(in), 1.0);
}

TEST(Bound, SmallSMReduction) {
  auto in = example();
  in.M = 1e-10;
  const double e = std::exp(-0.4) * std::pow(1.0 - std::exp(-0.3), 4);
  EXPECT_NEAR(theorem2_bound_raw(in), 0.05 + 0.95 * 2.0 * (1.0 - e), 1e-9);
}

TEST(Bound, TailOneGivesOne) {
  auto in = example();
  in.p_tail = 1.0;
  EXPECT_EQ(theorem2_bound_raw(in), 1.0);
  EXPECT_EQ(simplified_bound(in), 1.0);
}

TEST(Bound, SimplifiedDominatesOnRandomInputs) {
  RandomStream rng(85, 0);
  for (int k = 0; k < 1000; ++k) {
    BetaBoundInputs in;
    in.a = rng.uniform(0.1, 2.0);
    in.b = in.a * rng.uniform(1.01, 20.0);
    in.t = rng.uniform(0.1, 5.0);
    in.s = in.t * rng.uniform(1e-4, 0.999);
    in.M = rng.uniform(0.01, 50.0);
    in.dim = 2 + static_cast<int>(rng.below(3));
    in.lambda_inner = rng.uniform(0.01, 20.0);
    in.L = rng.uniform(0.0, 50.0);
    in.p_tail = rng.uniform();
    const double raw = theorem2_bound_raw(in);
    EXPECT_GE(simplified_bound_raw(in), raw - 1e-12 * raw);
    EXPECT_GE(simplified_bound(in), theorem2_bound(in));
    EXPECT_LE(theorem2_bound(in), 1.0);
    EXPECT_GE(theorem2_bound(in), 0.0);
  }
}

TEST(Bound, NonIncreasingInL) {
  auto in = example();
  in.p_tail = 0.0;
  in.M = 0.01;
  in.s = 0.5;
  double prev = std::numeric_limits<double>::infinity();
  for (double L = 0.0; L <= 100.0; L += 0.5) {
    in.L = L;
    const double v = theorem2_bound_raw(in);
    EXPECT_LE(v, prev);
    EXPECT_LE(simplified_bound_raw(in), prev + 1.0);
    prev = v;
  }
  // L -> infinity leaves 2 (1 - e^{-s Lambda([W'])}) for sM -> 0.
  EXPECT_NEAR(prev, 2.0 * (1.0 - std::exp(-0.5 * 4.0)), 1e-2);
}

TEST(Bound, RejectsBadInputs) {
  auto in = example();
  in.s = in.t;
  EXPECT_THROW(theorem2_bound(in), DomainError);
  in = example();
  in.p_tail = 1.5;
  EXPECT_THROW(simplified_bound(in), DomainError);
  in = example();
  in.b = 0.5;
  EXPECT_THROW(theorem2_bound(in), DomainError);
}

// E B^r = A_r(x) / p^r with A_r the Eulerian polynomial and x = 1 - p.
double eulerian_moment(double q, double t, int r) {
  std::vector<double> a = {1.0};
  for (int n = 2; n <= r; ++n) {
    std::vector<double> next(n, 0.0);
    for (int k = 0; k < n; ++k) {
      if (k < static_cast<int>(a.size())) next[k] += (k + 1) * a[k];
      if (k >= 1) next[k] += (n - k) * a[k - 1];
    }
    a = next;
  }
  const double p = std::exp(-q * t);
  double poly = 0.0;
  for (int k = static_cast<int>(a.size()) - 1; k >= 0; --k) poly = poly * (1.0 - p) + a[k];
  return poly / std::pow(p, r);
}

TEST(BirthChain, FirstMomentAndClosedForms) {
  EXPECT_NEAR(birth_chain_moment(1.0, std::log(2.0), 1), 2.0, 1e-11);
  for (double qt : {0.01, 0.5, 1.0, 2.0, 4.0}) {
    EXPECT_NEAR(birth_chain_moment(qt, 1.0, 1), std::exp(qt), 1e-10 * std::exp(qt));
    for (int r = 2; r <= 5; ++r) {
      const double ref = eulerian_moment(qt, 1.0, r);
      EXPECT_NEAR(birth_chain_moment(qt, 1.0, r), ref, 1e-11 * ref) << "qt=" << qt << " r=" << r;
    }
  }
  EXPECT_NEAR(birth_chain_moment(1.0, 1e-12, 3), 1.0, 1e-10);
  EXPECT_THROW(birth_chain_moment(0.0, 1.0, 1), DomainError);
  EXPECT_THROW(birth_chain_moment(1.0, 1.0, 0), DomainError);
}

TEST(BirthChain, TailIsGeometric) {
  const double x = 1.0 - std::exp(-1.5);
  EXPECT_EQ(birth_chain_tail(1.5, 1.0, 0.5), 1.0);
  EXPECT_EQ(birth_chain_tail(1.5, 1.0, 1.0), 1.0);
  EXPECT_NEAR(birth_chain_tail(1.5, 1.0, 2.0), x, 1e-15);
  EXPECT_NEAR(birth_chain_tail(1.5, 1.0, 4.2), std::pow(x, 4), 1e-15);
}

TEST(ZetaTail, BelowInitialMeasureIsCertain) {
  const auto z = sample_zeta(axis(), Window(1.0, 2), 0.5, 500, 86, 1);
  const double q = lambda_hit(axis(), Window(1.0, 2).polytope());
  for (double v : z) EXPECT_GE(v, q - 1e-9);
  EXPECT_EQ(zeta_tail_from_samples(z, 0.99 * q).p_hat, 1.0);
}

TEST(ZetaTail, MarkovAndThresholds) {
  const auto z = sample_zeta(axis(), Window(1.0, 2), 0.5, 2000, 87, 1);
  for (double M : {5.0, 7.0, 10.0, 14.0, 20.0}) {
    const auto tail = zeta_tail_from_samples(z, M, 2);
    EXPECT_LE(tail.p_hat, tail.markov_bound + 3.0 * tail.markov_stderr);
  }
  for (double eps : {0.2, 0.1, 0.05}) {
    const double M = zeta_threshold(z, eps);
    std::size_t below = 0;
    for (double v : z) below += v < M;
    EXPECT_GT(static_cast<double>(below) / z.size(), 1.0 - eps);
    EXPECT_TRUE(std::isfinite(M));
  }
  EXPECT_THROW(zeta_threshold(z, 0.0), DomainError);
  EXPECT_THROW(zeta_tail(axis(), Window(1.0, 2), 0.5, 10.0, 100, 1), DomainError);
}

TEST(ZetaTail, DominatedByBirthChainMoment) {
  // zeta(Y_t n W') <= q B_t with q = Lambda([W']) in the pathwise coupling.
  const double q = lambda_hit(axis(), Window(1.0, 2).polytope()), t = 0.2;
  const auto z = sample_zeta(axis(), Window(1.0, 2), t, 2000, 88, 1);
  std::vector<double> sq;
  for (double v : z) sq.push_back(v * v);
  EXPECT_LE(mean(sq), q * q * birth_chain_moment(q, t, 2) + 3.0 * standard_error(sq));
}

TEST(OptimizeBound, SkipsInvalidGrid) {
  const std::vector<double> z(100, 5.0);
  const std::vector<double> us = {0.7}, vs = {0.2};
  EXPECT_FALSE(optimize_bound(axis(), 1.0, 1.2, 0.5, z, us, vs).has_value());
  const auto pt = optimize_bound(axis(), 1.0, 4.0, 1.0, z, us, vs);
  ASSERT_TRUE(pt.has_value());
  EXPECT_NEAR(pt->s, std::pow(4.0, -0.7), 1e-15);
  EXPECT_EQ(pt->p_tail, 1.0);
  EXPECT_EQ(pt->value, 1.0);
}

TEST(DecayExperiment, SmallRunWritesCsv) {
  const std::vector<double> bs = {2.0, 4.0};
  DecayOptions opts;
  opts.threads = 1;
  const auto res = decay_experiment(axis(), 1.0, 1.0, bs, 200, 89, opts);
  ASSERT_EQ(res.rows.size(), 2u);
  for (const auto& r : res.rows) {
    EXPECT_GE(r.beta, 0.0);
    EXPECT_LE(r.beta, 1.0);
  }
  std::ostringstream csv;
  write_csv(csv, res);
  EXPECT_EQ(csv.str().rfind("b,estimator,value,stderr\n", 0), 0u);
  EXPECT_NE(csv.str().find(",beta_hat,"), std::string::npos);
}

}  // namespace
}  // namespace stit
