#include "langtraj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"

namespace langtraj {

double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty vector");
  return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("sample SD needs at least two values");
  const double m = mean(values);
  CompensatedSum ss;
  for (double v : values) ss.add((v - m) * (v - m));
  return std::sqrt(ss.value() / static_cast<double>(values.size() - 1));
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("standardize needs at least two values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double sd = sample_sd(values);
  if (*lo == *hi || !(sd > 0.0)) throw ConstantColumn("cannot standardize a constant column");
  const double m = mean(values);
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - m) / sd; });
  return out;
}

double normal_quantile(double q) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), q);
}

double t_quantile(double q, double df) {
  if (!(df > 0.0)) throw DomainError("t quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), q);
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t test needs positive degrees of freedom");
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

Interval fisher_ci(double r, std::size_t n, double level) {
  if (n < 4) throw SampleTooSmall("Fisher-z interval needs n >= 4");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0, 1)");
  if (std::abs(r) >= 1.0) return {r, r};
  const double z = std::atanh(r);
  const double half = normal_quantile(0.5 + level / 2.0) / std::sqrt(static_cast<double>(n) - 3.0);
  return {std::tanh(z - half), std::tanh(z + half)};
}

Correlation pearson_r(std::span<const double> x, std::span<const double> y, double level) {
  if (x.size() != y.size()) throw DomainError("pearson_r: length mismatch");
  if (x.size() < 4) throw SampleTooSmall("pearson_r needs at least 4 pairs");
  const auto zx = standardize(x);
  const auto zy = standardize(y);
  CompensatedSum s;
  for (std::size_t i = 0; i < zx.size(); ++i) s.add(zx[i] * zy[i]);
  Correlation c;
  c.n = x.size();
  c.r = std::clamp(s.value() / static_cast<double>(x.size() - 1), -1.0, 1.0);
  c.ci = fisher_ci(c.r, c.n, level);
  const double df = static_cast<double>(c.n) - 2.0;
  const double denom = 1.0 - c.r * c.r;
  c.p_value = denom > 0.0 ? t_two_sided_p(c.r * std::sqrt(df / denom), df) : 0.0;
  return c;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value outside [0, 1]: " + std::to_string(p));
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const std::size_t idx = order[rank - 1];
    running = std::min(running, p_values[idx] * (static_cast<double>(m) / static_cast<double>(rank)));
    // m * p / m can round below p; the exact value never does.
    adjusted[idx] = std::max(running, p_values[idx]);
  }
  return adjusted;
}

}  // namespace langtraj
