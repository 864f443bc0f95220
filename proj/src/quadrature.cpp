#include "stit/quadrature.hpp"

#include <array>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "stit/error.hpp"

namespace stit {

namespace {

double radical_inverse(unsigned base, unsigned long long i) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<Vec> build_points(int dim) {
  std::vector<Vec> pts;
  pts.reserve(2 * kSpherePointPairs);
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kSpherePointPairs; ++i) {
      // Upper hemisphere only; the antipodes complete the set.
      const double z = 1.0 - (i + 0.5) / kSpherePointPairs;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden * i;
      pts.push_back(make_vec({r * std::cos(phi), r * std::sin(phi), z}));
    }
  } else {
    constexpr std::array<unsigned, kMaxDim> primes = {2, 3, 5, 7};
    for (int i = 0; i < kSpherePointPairs; ++i) {
      Vec g(dim);
      for (int j = 0; j < dim; ++j) {
        const double u = radical_inverse(primes[j], static_cast<unsigned long long>(i) + 1);
        g(j) = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
      }
      pts.push_back(g / g.norm());
    }
  }
  const std::size_t half = pts.size();
  for (std::size_t i = 0; i < half; ++i) pts.push_back(-pts[i]);
  return pts;
}

}  // namespace

std::span<const Vec> sphere_points(int dim) {
  if (dim < 2 || dim > kMaxDim) throw DomainError("sphere_points: unsupported dimension");
  static std::array<std::vector<Vec>, kMaxDim + 1> cache;
  static std::array<std::once_flag, kMaxDim + 1> once;
  std::call_once(once[dim], [dim] { cache[dim] = build_points(dim); });
  return cache[dim];
}

}  // namespace stit
