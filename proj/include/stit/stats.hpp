#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stit {

struct TestResult {
  double statistic;
  double p_value;
};

// Two-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic
// Kolmogorov distribution with Stephens' small-sample correction; with ties
// (discrete data) it is conservative.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

// Pearson chi-square goodness of fit of counts to cell probabilities
// (normalized internally); df = cells - 1.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probs);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// Pearson correlation.
double pearson(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope;
  double intercept;
};

// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Correlation between sorted samples and Exp(1) quantiles at (i - 0.5)/n.
double exponential_qq_correlation(std::vector<double> samples);

double mean(std::span<const double> x);
// Standard error of the mean (sample sd / sqrt(n)).
double standard_error(std::span<const double> x);

// Binomial proportion and its standard error sqrt(p(1-p)/n).
struct Proportion {
  double p;
  double stderr_p;
};
Proportion proportion(std::size_t hits, std::size_t n);

}  // namespace stit
