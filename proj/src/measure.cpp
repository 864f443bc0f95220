#include "stit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "stit/error.hpp"
#include "stit/quadrature.hpp"

namespace stit {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr int kMaxRejections = 1'000'000;

void check_dim(int dim) {
  if (dim < 2 || dim > kMaxDim) throw DomainError("dimension must be in [2, 4]");
}

double width_at(const Polytope& k, double phi) {
  const Vec u = make_vec({std::cos(phi), std::sin(phi)});
  return k.support(u) + k.support(-u);
}

// Integral of width over phi in [0, pi), split where the support function
// switches vertex (the facet normal angles modulo pi).
double isotropic2d_width_integral(const Polytope& k, double tol) {
  std::vector<double> breaks = {0.0, std::numbers::pi};
  for (const Facet& f : k.facets()) {
    double a = std::atan2(f.normal(1), f.normal(0));
    a = std::fmod(a + 2.0 * std::numbers::pi, std::numbers::pi);
    if (a > 0.0 && a < std::numbers::pi) breaks.push_back(a);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double x, double y) { return y - x < 1e-14; }),
               breaks.end());
  return piecewise_simpson([&](double phi) { return width_at(k, phi); }, breaks, tol);
}

}  // namespace

// ---------------------------------------------------------------------------
// DirectionalDistribution

DirectionalDistribution DirectionalDistribution::isotropic(int dim) {
  check_dim(dim);
  return DirectionalDistribution(Kind::kIsotropic, dim, {});
}

DirectionalDistribution DirectionalDistribution::discrete_unchecked(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("discrete distribution needs at least one atom");
  const int dim = atoms.front().direction.dim();
  check_dim(dim);
  for (const Atom& a : atoms) {
    if (a.direction.dim() != dim) throw DomainError("atoms have mixed dimensions");
  }
  return DirectionalDistribution(Kind::kDiscreteEven, dim, std::move(atoms));
}

DirectionalDistribution DirectionalDistribution::discrete(std::vector<Atom> atoms) {
  auto d = discrete_unchecked(std::move(atoms));
  const auto problems = d.violations();
  if (!problems.empty()) throw AssumptionFailed("directional distribution: " + problems.front());
  return d;
}

DirectionalDistribution DirectionalDistribution::axis_parallel(int dim) {
  check_dim(dim);
  std::vector<Atom> atoms;
  for (int i = 0; i < dim; ++i) {
    atoms.push_back({Direction::axis(dim, i, +1), 1.0 / (2 * dim)});
    atoms.push_back({Direction::axis(dim, i, -1), 1.0 / (2 * dim)});
  }
  return discrete(std::move(atoms));
}

std::vector<std::string> DirectionalDistribution::violations() const {
  std::vector<std::string> out;
  if (kind_ == Kind::kIsotropic) return out;

  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!(a.weight > 0.0)) out.push_back("probability: atom weights must be positive");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    out.push_back("probability: weights sum to " + std::to_string(total) + ", not 1");
  }

  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Vec& u = atoms_[i].direction.vec();
    const bool mirrored = std::any_of(atoms_.begin(), atoms_.end(), [&](const Atom& b) {
      return (b.direction.vec() + u).norm() <= kGeomEps &&
             std::abs(b.weight - atoms_[i].weight) <= kWeightTol;
    });
    if (!mirrored) {
      out.push_back("evenness: atom " + std::to_string(i) + " has no antipodal atom of equal weight");
      break;
    }
  }

  Eigen::MatrixXd dirs(dim_, atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) dirs.col(i) = atoms_[i].direction.vec();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dirs);
  qr.setThreshold(1e-9);
  if (qr.rank() < dim_) {
    out.push_back("non-degeneracy: atoms lie on a great subsphere");
  }
  return out;
}

// ---------------------------------------------------------------------------
// HyperplaneMeasure

HyperplaneMeasure::HyperplaneMeasure(double gamma, DirectionalDistribution theta)
    : gamma_(gamma), theta_(std::move(theta)) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive");
  const auto problems = theta_.violations();
  if (!problems.empty()) throw AssumptionFailed("hyperplane measure: " + problems.front());
}

HyperplaneMeasure HyperplaneMeasure::isotropic(double gamma, int dim) {
  return HyperplaneMeasure(gamma, DirectionalDistribution::isotropic(dim));
}

HyperplaneMeasure HyperplaneMeasure::axis_parallel(double gamma, int dim) {
  return HyperplaneMeasure(gamma, DirectionalDistribution::axis_parallel(dim));
}

// ---------------------------------------------------------------------------
// Hitting measure and conditional sampling

double lambda_hit(const HyperplaneMeasure& m, const Polytope& k) {
  if (k.empty()) throw DomainError("lambda_hit: empty polytope");
  if (k.dim() != m.dim()) throw DomainError("lambda_hit: dimension mismatch");
  const double half_gamma = 0.5 * m.gamma();
  const auto& theta = m.theta();

  if (theta.kind() == DirectionalDistribution::Kind::kDiscreteEven) {
    double sum = 0.0;
    for (const auto& atom : theta.atoms()) sum += atom.weight * k.width(atom.direction.vec());
    return half_gamma * sum;
  }
  if (m.dim() == 2) {
    // Lambda = (gamma / (2 pi)) * integral over [0, pi) of width.
    const double scale = m.gamma() / (2.0 * std::numbers::pi);
    return scale * isotropic2d_width_integral(k, kQuadratureTol / scale);
  }
  const auto pts = sphere_points(m.dim());
  double sum = 0.0;
  for (const Vec& u : pts) sum += k.width(u);
  return half_gamma * sum / static_cast<double>(pts.size());
}

Hyperplane sample_conditional(const HyperplaneMeasure& m, const Polytope& k, RandomStream& rng) {
  if (k.empty()) throw DomainError("sample_conditional: empty polytope");
  if (k.dim() != m.dim()) throw DomainError("sample_conditional: dimension mismatch");
  const auto& theta = m.theta();
  Vec u;

  if (theta.kind() == DirectionalDistribution::Kind::kDiscreteEven) {
    // Atom j with probability proportional to w_j * width(u_j).
    const auto& atoms = theta.atoms();
    std::vector<double> cum(atoms.size());
    double total = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      total += atoms[j].weight * k.width(atoms[j].direction.vec());
      cum[j] = total;
    }
    if (!(total > 0.0)) throw DomainError("sample_conditional: Lambda([K]) = 0");
    const double target = rng.uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const auto j = std::min<std::size_t>(it - cum.begin(), atoms.size() - 1);
    u = atoms[j].direction.vec();
  } else {
    // Rejection from the uniform law with envelope = diameter >= width.
    const double envelope = k.diameter();
    int tries = 0;
    while (true) {
      if (++tries > kMaxRejections) {
        throw InternalError("sample_conditional: rejection loop exceeded 1e6 iterations");
      }
      if (m.dim() == 2) {
        const double phi = rng.uniform(0.0, std::numbers::pi);
        u = make_vec({std::cos(phi), std::sin(phi)});
      } else {
        Vec g(m.dim());
        for (int i = 0; i < m.dim(); ++i) g(i) = rng.normal();
        const double n = g.norm();
        if (!(n > 0.0)) continue;
        u = g / n;
      }
      if (rng.uniform() * envelope < k.width(u)) break;
    }
  }

  // Signed offset uniform over the chord {x : <., u> = x hits K}.
  const double lo = -k.support(-u);
  const double hi = k.support(u);
  return Hyperplane::from_signed(rng.uniform(lo, hi), Direction::normalized(u));
}

// ---------------------------------------------------------------------------
// Separating measures

double separating_measure(const HyperplaneMeasure& m, double a, double b, int facet) {
  if (!(a > 0.0) || !(a < b)) throw DomainError("separating_measure: need 0 < a < b");
  const int dim = m.dim();
  if (facet < 0 || facet >= 2 * dim) throw DomainError("separating_measure: bad facet index");
  const auto inner = Window(a, dim).facet_vertices(facet);
  const auto outer = Window(b, dim).facet_vertices(facet);
  // Length of {alpha : h(f_i', u) <= alpha <= -h(f_i, -u)}.
  auto gap = [&](const Vec& u) {
    return std::max(0.0, -support(outer, Vec(-u)) - support(inner, u));
  };

  const auto& theta = m.theta();
  if (theta.kind() == DirectionalDistribution::Kind::kDiscreteEven) {
    double sum = 0.0;
    for (const auto& atom : theta.atoms()) sum += atom.weight * gap(atom.direction.vec());
    return m.gamma() * sum;
  }
  if (dim == 2) {
    std::vector<double> breaks;
    for (int k = 0; k <= 8; ++k) breaks.push_back(k * std::numbers::pi / 4.0);
    const double scale = m.gamma() / (2.0 * std::numbers::pi);
    return scale * piecewise_simpson(
                       [&](double phi) { return gap(make_vec({std::cos(phi), std::sin(phi)})); },
                       breaks, kQuadratureTol / scale);
  }
  const auto pts = sphere_points(dim);
  double sum = 0.0;
  for (const Vec& u : pts) sum += gap(u);
  return m.gamma() * sum / static_cast<double>(pts.size());
}

SeparatingFamily separating_family(const HyperplaneMeasure& m, double a, double b) {
  SeparatingFamily fam{a, b, {}, 0.0};
  for (int i = 0; i < 2 * m.dim(); ++i) fam.per_facet.push_back(separating_measure(m, a, b, i));
  fam.min_value = *std::min_element(fam.per_facet.begin(), fam.per_facet.end());
  return fam;
}

double big_L(const HyperplaneMeasure& m, double a, double b) {
  const auto fam = separating_family(m, a, b);
  for (std::size_t i = 0; i < fam.per_facet.size(); ++i) {
    if (!(fam.per_facet[i] > 0.0)) {
      throw AssumptionFailed("separating measure of facet " + std::to_string(i) +
                             " vanishes: Lambda(G_i(a,b)) = 0");
    }
  }
  return fam.min_value;
}

}  // namespace stit
