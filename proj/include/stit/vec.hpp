#pragma once

#include <Eigen/Core>

namespace stit {

// Largest supported space dimension. Coordinates live inline (no heap).
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

// Incidence tolerance for vertices against hyperplanes and facets.
inline constexpr double kGeomEps = 1e-9;

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace stit
