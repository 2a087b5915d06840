#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace langtraj {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

/// (x - mean) / sd with the sample SD. Needs at least two values; throws
/// ConstantColumn when every value is equal.
std::vector<double> standardize(std::span<const double> values);

struct Correlation {
  double r = 0.0;
  Interval ci;          // Fisher-z interval
  double p_value = 1.0;  // two-sided t test with n - 2 df
  std::size_t n = 0;
};

/// Product-moment correlation with a Fisher-z confidence interval.
/// Needs n >= 4 and non-constant inputs.
Correlation pearson_r(std::span<const double> x, std::span<const double> y, double level = 0.95);

/// tanh(atanh(r) -/+ z_{(1+level)/2} / sqrt(n - 3)).
Interval fisher_ci(double r, std::size_t n, double level = 0.95);

/// Benjamini-Hochberg step-up adjusted p-values in input order. Throws
/// DomainError for entries outside [0, 1].
std::vector<double> bh_adjust(std::span<const double> p_values);

/// Two-sided p-value of a t statistic.
double t_two_sided_p(double t, double df);
/// Upper quantile t_{q, df}, e.g. q = 0.975 for a 95% interval.
double t_quantile(double q, double df);
double normal_quantile(double q);

}  // namespace langtraj
