#include "stit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "stit/error.hpp"

namespace stit {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());

  // Walk both sorted samples; evaluate the ECDF gap after each distinct value.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.size() < 2) {
    throw DomainError("chi_square_gof: need matching counts and probabilities (>= 2 cells)");
  }
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double ptot = std::accumulate(probs.begin(), probs.end(), 0.0);
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = n * probs[k] / ptot;
    if (!(e > 0.0)) throw DomainError("chi_square_gof: zero expected count");
    stat += (observed[k] - e) * (observed[k] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> r(x.size());
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t e = k;
    while (e + 1 < idx.size() && x[idx[e + 1]] == x[idx[k]]) ++e;
    const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
    for (std::size_t q = k; q <= e; ++q) r[idx[q]] = avg;
    k = e + 1;
  }
  return r;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: need >= 2 pairs");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit: need >= 2 points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("linear_fit: x values are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double exponential_qq_correlation(std::vector<double> samples) {
  if (samples.size() < 2) throw DomainError("exponential_qq_correlation: need >= 2 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<double> q(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) q[i] = -std::log1p(-(i + 0.5) / n);
  return pearson(samples, q);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean: empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double n = static_cast<double>(x.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

Proportion proportion(std::size_t hits, std::size_t n) {
  if (n == 0) throw DomainError("proportion: no trials");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace stit
