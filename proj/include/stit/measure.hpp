#pragma once

#include <string>
#include <vector>

#include "stit/geometry.hpp"
#include "stit/rng.hpp"

namespace stit {

/// Even probability measure theta on the unit sphere S^(l-1): the law of the
/// normal direction of dividing hyperplanes.
class DirectionalDistribution {
 public:
  enum class Kind { kIsotropic, kDiscreteEven };

  struct Atom {
    Direction direction;
    double weight;
  };

  static DirectionalDistribution isotropic(int dim);
  // Throws AssumptionFailed when the atoms are not an even, normalized,
  // non-degenerate measure.
  static DirectionalDistribution discrete(std::vector<Atom> atoms);
  // Same, without validation; check violations() before use.
  static DirectionalDistribution discrete_unchecked(std::vector<Atom> atoms);
  // Uniform on the 2l half-axis directions +-e_i.
  static DirectionalDistribution axis_parallel(int dim);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Human-readable list of violated requirements (probability, evenness,
  // non-degeneracy). Empty for a valid distribution.
  std::vector<std::string> violations() const;

 private:
  DirectionalDistribution(Kind kind, int dim, std::vector<Atom> atoms)
      : kind_(kind), dim_(dim), atoms_(std::move(atoms)) {}

  Kind kind_;
  int dim_;
  std::vector<Atom> atoms_;
};

/// Translation-invariant hyperplane measure Lambda = gamma * lambda (x) theta
/// in the (alpha, u) parameterization.
class HyperplaneMeasure {
 public:
  // Throws DomainError for gamma <= 0 and AssumptionFailed for invalid theta.
  HyperplaneMeasure(double gamma, DirectionalDistribution theta);

  static HyperplaneMeasure isotropic(double gamma, int dim);
  static HyperplaneMeasure axis_parallel(double gamma, int dim);

  double gamma() const { return gamma_; }
  const DirectionalDistribution& theta() const { return theta_; }
  int dim() const { return theta_.dim(); }

 private:
  double gamma_;
  DirectionalDistribution theta_;
};

// Quadrature tolerance for isotropic integrals.
inline constexpr double kQuadratureTol = 1e-10;

// Lambda([K]) = (gamma/2) * integral of width_K(u) theta(du).
// Exact finite sum for discrete theta; adaptive Simpson (split at the facet
// normal angles) for isotropic theta in 2D; sphere quadrature for l >= 3.
double lambda_hit(const HyperplaneMeasure& m, const Polytope& k);

// Draws H from Lambda restricted to [K] and normalized. The returned H cuts
// int(K) with probability one.
Hyperplane sample_conditional(const HyperplaneMeasure& m, const Polytope& k, RandomStream& rng);

// Lambda(G_i(a,b)): measure of the hyperplanes separating facet i of
// [-a,a]^l from facet i of [-b,b]^l. Facet indices follow Window.
double separating_measure(const HyperplaneMeasure& m, double a, double b, int facet);

struct SeparatingFamily {
  double a;
  double b;
  std::vector<double> per_facet;  // 2l values, Window facet order
  double min_value;               // L(a,b)
};

// All 2l separating measures; no positivity check.
SeparatingFamily separating_family(const HyperplaneMeasure& m, double a, double b);

// L(a,b) = min_i Lambda(G_i(a,b)). Throws AssumptionFailed naming the first
// facet whose separating measure vanishes.
double big_L(const HyperplaneMeasure& m, double a, double b);

}  // namespace stit
