#include "stit/measure.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stit/error.hpp"
#include "stit/stats.hpp"

namespace stit {
namespace {

using std::numbers::pi;

double perimeter_oracle(const std::vector<Vec>& ccw) {
  double s = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) s += (ccw[(i + 1) % ccw.size()] - ccw[i]).norm();
  return s;
}

// Closed form of Lambda(G_i(a,b)) for isotropic theta in the plane: the gap
// (b-a) cos(phi) - (a+b)|sin(phi)| is positive for |phi| < phi0.
double isotropic_separating_oracle(double gamma, double a, double b) {
  const double phi0 = std::atan((b - a) / (b + a));
  return gamma / (2.0 * pi) * 2.0 * ((b - a) * std::sin(phi0) - (a + b) * (1.0 - std::cos(phi0)));
}

HyperplaneMeasure iso() { return HyperplaneMeasure::isotropic(2.0 * pi, 2); }
HyperplaneMeasure axis() { return HyperplaneMeasure::axis_parallel(4.0, 2); }

TEST(DirectionalDistribution, AxisParallelIsValid) {
  EXPECT_TRUE(DirectionalDistribution::axis_parallel(2).violations().empty());
  EXPECT_TRUE(DirectionalDistribution::axis_parallel(3).violations().empty());
}

TEST(DirectionalDistribution, DetectsOddAtoms) {
  auto d = DirectionalDistribution::discrete_unchecked(
      {{Direction::axis(2, 0, +1), 0.5}, {Direction::axis(2, 1, +1), 0.5}});
  const auto v = d.violations();
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v.front().find("evenness"), std::string::npos);
  EXPECT_THROW(HyperplaneMeasure(1.0, d), AssumptionFailed);
}

TEST(DirectionalDistribution, DetectsBadNormalization) {
  auto d = DirectionalDistribution::discrete_unchecked(
      {{Direction::axis(2, 0, +1), 0.3}, {Direction::axis(2, 0, -1), 0.3},
       {Direction::axis(2, 1, +1), 0.3}, {Direction::axis(2, 1, -1), 0.3}});
  ASSERT_FALSE(d.violations().empty());
  EXPECT_NE(d.violations().front().find("probability"), std::string::npos);
}

TEST(DirectionalDistribution, DetectsGreatSubsphere) {
  EXPECT_THROW(DirectionalDistribution::discrete(
                   {{Direction::axis(2, 0, +1), 0.5}, {Direction::axis(2, 0, -1), 0.5}}),
               AssumptionFailed);
}

TEST(HyperplaneMeasure, RejectsNonPositiveGamma) {
  EXPECT_THROW(HyperplaneMeasure::isotropic(0.0, 2), DomainError);
  EXPECT_THROW(HyperplaneMeasure::isotropic(-1.0, 2), DomainError);
}

TEST(LambdaHit, IsotropicIsPerimeter) {
  const std::vector<std::vector<Vec>> bodies = {
      {make_vec({0, 0}), make_vec({1, 0}), make_vec({1, 1}), make_vec({0, 1})},
      {make_vec({-2, -0.5}), make_vec({3, -0.5}), make_vec({3, 0.25}), make_vec({-2, 0.25})},
      {make_vec({0, 0}), make_vec({1, 0}), make_vec({0, 1})},
      {make_vec({0.3, -1}), make_vec({2, 0.1}), make_vec({1, 2}), make_vec({-1, 0.5})},
  };
  for (const auto& loop : bodies) {
    const double oracle = perimeter_oracle(loop);
    EXPECT_NEAR(lambda_hit(iso(), Polytope::polygon(loop)), oracle, 1e-9 * oracle);
  }
  EXPECT_NEAR(lambda_hit(iso(), Polytope::polygon(bodies[2])), 2.0 + std::sqrt(2.0), 1e-9);
}

TEST(LambdaHit, AxisIsHalfPerimeter) {
  for (auto [w, h] : {std::pair{1.0, 1.0}, {3.0, 0.5}, {0.01, 7.0}}) {
    const Polytope r = Polytope::box(make_vec({0, 0}), make_vec({w, h}));
    EXPECT_NEAR(lambda_hit(axis(), r), w + h, 1e-12);
  }
}

TEST(LambdaHit, IsotropicThreeDimensionalCube) {
  // Mean width of [0,1]^3 is 3/2, so Lambda = (gamma/2) * 3/2.
  const auto m = HyperplaneMeasure::isotropic(2.0, 3);
  EXPECT_NEAR(lambda_hit(m, Window(0.5, 3).polytope()), 1.5, 2e-3);
}

TEST(LambdaHit, TranslationInvariant) {
  RandomStream rng(21, 0);
  const Polytope p = Polytope::polygon({make_vec({0, 0}), make_vec({2, 0.3}), make_vec({0.5, 1.7})});
  for (int k = 0; k < 20; ++k) {
    const Vec v = make_vec({rng.uniform(-50, 50), rng.uniform(-50, 50)});
    EXPECT_NEAR(lambda_hit(iso(), p.translated(v)), lambda_hit(iso(), p), 1e-9);
    EXPECT_NEAR(lambda_hit(axis(), p.translated(v)), lambda_hit(axis(), p), 1e-9);
  }
}

TEST(LambdaHit, SuperadditiveUnderSplitting) {
  RandomStream rng(22, 0);
  for (const auto& m : {iso(), axis()}) {
    Polytope cell = Window(2.0, 2).polytope();
    for (int k = 0; k < 200; ++k) {
      const Hyperplane h = sample_conditional(m, cell, rng);
      const auto parts = split(cell, h, k);
      if (!parts) continue;
      EXPECT_GE(lambda_hit(m, parts->plus) + lambda_hit(m, parts->minus),
                lambda_hit(m, cell) - 1e-9);
      cell = parts->plus.volume() > parts->minus.volume() ? parts->plus : parts->minus;
      if (cell.volume() < 1e-3) cell = Window(2.0, 2).polytope();
    }
  }
}

TEST(SampleConditional, AlwaysHitsInterior) {
  RandomStream rng(23, 0);
  const Polytope k = Polytope::polygon({make_vec({0, 0}), make_vec({3, 1}), make_vec({1, 2})});
  for (const auto& m : {iso(), axis()}) {
    for (int i = 0; i < 2000; ++i) EXPECT_TRUE(hits_interior(sample_conditional(m, k, rng), k));
  }
}

TEST(SampleConditional, AxisModelSplitsEvenlyOnSquare) {
  RandomStream rng(24, 0);
  const Polytope sq = Polytope::box(make_vec({0, 0}), make_vec({1, 1}));
  std::vector<double> counts(2, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const auto& u = sample_conditional(axis(), sq, rng).normal();
    counts[std::abs(u[0]) > 0.5 ? 0 : 1] += 1.0;
  }
  const std::vector<double> probs = {0.5, 0.5};
  EXPECT_GT(chi_square_gof(counts, probs).p_value, 0.01);
}

TEST(SampleConditional, IsotropicDirectionMarginalMatchesWidth) {
  // Direction angle in [0, pi) has density proportional to width(phi); the
  // bin probabilities come from a fine midpoint rule.
  RandomStream rng(25, 0);
  const Polytope k = Polytope::polygon({make_vec({0, 0}), make_vec({3, 0.5}), make_vec({1, 1.5})});
  constexpr int kBins = 16;
  std::vector<double> probs(kBins, 0.0);
  constexpr int kFine = 4000;
  for (int j = 0; j < kFine; ++j) {
    const double phi = (j + 0.5) * pi / kFine;
    probs[j * kBins / kFine] += k.width(make_vec({std::cos(phi), std::sin(phi)}));
  }
  std::vector<double> counts(kBins, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const Vec& u = sample_conditional(iso(), k, rng).normal().vec();
    double phi = std::atan2(u(1), u(0));
    if (phi < 0) phi += pi;
    if (phi >= pi) phi -= pi;
    counts[std::min(kBins - 1, static_cast<int>(phi / pi * kBins))] += 1.0;
  }
  EXPECT_GT(chi_square_gof(counts, probs).p_value, 0.01);
}

TEST(SampleConditional, ThinRectangleFavorsShortCuts) {
  // P(|<u,e1>| > sqrt(2)/2) = int_{-pi/4}^{pi/4} width / int_{-pi/2}^{pi/2} width
  // with width = 10|cos| + 0.1|sin|.
  const double inside = 2.0 * (10.0 * std::sin(pi / 4) + 0.1 * (1.0 - std::cos(pi / 4)));
  const double total = 2.0 * (10.0 + 0.1);
  const double oracle = inside / total;
  RandomStream rng(26, 0);
  const Polytope rect = Polytope::box(make_vec({0, 0}), make_vec({10, 0.1}));
  constexpr int kN = 10000;
  int hits = 0;
  for (int i = 0; i < kN; ++i) {
    hits += std::abs(sample_conditional(iso(), rect, rng).normal()[0]) > std::sqrt(0.5);
  }
  const auto p = proportion(hits, kN);
  EXPECT_NEAR(p.p, oracle, 4.0 * std::sqrt(oracle * (1 - oracle) / kN));
}

TEST(SeparatingMeasure, AxisModelIsGap) {
  EXPECT_NEAR(separating_measure(axis(), 1.0, 2.0, 0), 1.0, 1e-15);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(separating_measure(axis(), 1.0, 3.0, i), 2.0, 1e-15);
}

TEST(SeparatingMeasure, IsotropicClosedForm) {
  for (auto [a, b] : {std::pair{1.0, 2.0}, {1.0, 4.0}, {1.0, 1.05}, {2.0, 64.0}}) {
    const double oracle = isotropic_separating_oracle(2.0 * pi, a, b);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(separating_measure(iso(), a, b, i), oracle, 1e-9);
  }
}

TEST(SeparatingMeasure, OppositeFacetsAgree) {
  const auto m = HyperplaneMeasure::isotropic(1.3, 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(separating_measure(m, 1.0, 2.0, i), separating_measure(m, 1.0, 2.0, i + 3), 1e-9);
  }
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(separating_measure(iso(), 1.0, 2.5, i), separating_measure(iso(), 1.0, 2.5, i + 2),
                1e-12);
  }
}

TEST(SeparatingMeasure, LinearAndSuperlinear) {
  for (const auto& m : {iso(), axis()}) {
    for (int i = 0; i < 4; ++i) {
      const double base = separating_measure(m, 1.0, 2.0, i);
      for (double r : {2.0, 3.0, 10.0}) {
        EXPECT_NEAR(separating_measure(m, r, 2.0 * r, i), r * base, 1e-9);
        EXPECT_GE(separating_measure(m, 1.0, 2.0 * r, i), r * base - 1e-9);
      }
    }
  }
}

TEST(SeparatingMeasure, RejectsBadRadii) {
  EXPECT_THROW(separating_measure(axis(), 2.0, 2.0, 0), DomainError);
  EXPECT_THROW(separating_measure(axis(), 3.0, 2.0, 0), DomainError);
  EXPECT_THROW(separating_measure(axis(), 1.0, 2.0, 4), DomainError);
}

TEST(BigL, AxisModel) {
  EXPECT_NEAR(big_L(axis(), 1.0, 3.0), 2.0, 1e-15);
  EXPECT_NEAR(big_L(axis(), 2.0, 6.0), 2.0 * big_L(axis(), 1.0, 3.0), 1e-12);
  EXPECT_NEAR(big_L(iso(), 2.0, 6.0), 2.0 * big_L(iso(), 1.0, 3.0), 1e-9);
}

TEST(BigL, DiagonalDirectionsFailAssumption) {
  const double h = std::sqrt(0.5);
  const auto diag = DirectionalDistribution::discrete(
      {{Direction(make_vec({h, h})), 0.25}, {Direction(make_vec({-h, -h})), 0.25},
       {Direction(make_vec({h, -h})), 0.25}, {Direction(make_vec({-h, h})), 0.25}});
  const HyperplaneMeasure m(4.0, diag);
  try {
    big_L(m, 1.0, 2.0);
    FAIL() << "expected AssumptionFailed";
  } catch (const AssumptionFailed& e) {
    EXPECT_NE(std::string(e.what()).find("facet 0"), std::string::npos);
  }
}

TEST(SeparatingFamily, PairwiseDisjoint) {
  // Hyperplanes from Lambda^[W] fall in at most one G_i(a,b).
  RandomStream rng(27, 0);
  const double a = 1.0, b = 3.0;
  const Window inner(a, 2), outer(b, 2);
  for (const auto& m : {iso(), axis()}) {
    int separating = 0;
    for (int k = 0; k < 10000; ++k) {
      const Hyperplane h = sample_conditional(m, outer.polytope(), rng);
      int classes = 0;
      for (int i = 0; i < 4; ++i) {
        classes += separates(h, inner.facet_vertices(i), outer.facet_vertices(i));
      }
      EXPECT_LE(classes, 1);
      separating += classes;
    }
    EXPECT_GT(separating, 0);
  }
}

}  // namespace
}  // namespace stit
