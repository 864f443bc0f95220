#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "stit/vec.hpp"

namespace stit {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Roundoff floor: once delta is at the level of rounding noise, halving
  // the interval cannot improve it.
  const double noise = 64.0 * 2.220446049250313e-16 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, noise)) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline constexpr int kSimpsonMaxDepth = 40;

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        int max_depth = kSimpsonMaxDepth) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth);
}

/// Adaptive Simpson over consecutive pieces [breaks[k], breaks[k+1]].
/// Placing the breaks at the integrand's kinks keeps every piece smooth.
/// The tolerance is shared in proportion to piece length.
template <class F>
double piecewise_simpson(const F& f, std::span<const double> breaks, double tol) {
  if (breaks.size() < 2) return 0.0;
  const double total = breaks.back() - breaks.front();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double len = breaks[k + 1] - breaks[k];
    if (len <= 0.0) continue;
    sum += adaptive_simpson(f, breaks[k], breaks[k + 1], tol * len / total);
  }
  return sum;
}

/// Deterministic quasi-uniform point set on S^(l-1), closed under u -> -u.
/// l = 3 uses a spherical Fibonacci lattice; other l use a Halton sequence
/// pushed through the normal quantile. Shared per dimension.
std::span<const Vec> sphere_points(int dim);

inline constexpr int kSpherePointPairs = 8192;

}  // namespace stit
