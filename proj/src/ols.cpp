#include "langtraj/ols.hpp"

#include <algorithm>
#include <cmath>

#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"

namespace langtraj {

std::size_t OlsFit::index(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return j;
  }
  throw DomainError("no regression column named '" + std::string(name) + "'");
}

Interval OlsFit::ci(std::size_t j, double level) const {
  const double q = t_quantile(0.5 + level / 2.0, df);
  const double b = coefficients[static_cast<Eigen::Index>(j)];
  const double half = q * standard_errors[static_cast<Eigen::Index>(j)];
  return {b - half, b + half};
}

OlsFit ols(const DesignMatrix& design, std::size_t absorbed_parameters) {
  const auto& X = design.rows;
  const auto& y = design.outcome;
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) throw DomainError("outcome length does not match design rows");
  if (static_cast<std::size_t>(k) != design.column_names.size()) {
    throw DomainError("column name count does not match design columns");
  }
  if (n <= k + static_cast<Eigen::Index>(absorbed_parameters)) {
    throw SampleTooSmall("regression needs more rows than parameters (" + std::to_string(n) + " rows, " +
                         std::to_string(k + static_cast<Eigen::Index>(absorbed_parameters)) + " parameters)");
  }
  if (!X.allFinite() || !y.allFinite()) throw DomainError("design contains non-finite values");

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) {
    std::string dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) {
      if (!dependent.empty()) dependent += ", ";
      dependent += design.column_names[static_cast<std::size_t>(perm[j])];
    }
    throw SingularDesign("design is rank deficient; dependent columns: " + dependent);
  }

  OlsFit fit;
  fit.names = design.column_names;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - X * fit.coefficients;
  CompensatedSum rss;
  for (Eigen::Index i = 0; i < n; ++i) rss.add(fit.residuals[i] * fit.residuals[i]);
  fit.rss = rss.value();
  fit.df = static_cast<double>(n - k - static_cast<Eigen::Index>(absorbed_parameters));
  fit.sigma2 = fit.rss / fit.df;

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();

  fit.standard_errors.resize(k);
  fit.t_values.resize(k);
  fit.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double se = std::sqrt(std::max(0.0, fit.sigma2 * cov(j, j)));
    fit.standard_errors[j] = se;
    const double b = fit.coefficients[j];
    double t;
    if (se > 0.0) {
      t = b / se;
    } else {
      t = b == 0.0 ? 0.0 : std::copysign(INFINITY, b);
    }
    fit.t_values[j] = t;
    fit.p_values[j] = t_two_sided_p(t, fit.df);
  }
  return fit;
}

DesignMatrix standardized_design(std::span<const double> outcome, std::span<const NamedColumn> predictors,
                                 bool standardize_outcome) {
  const auto n = static_cast<Eigen::Index>(outcome.size());
  DesignMatrix d;
  d.column_names.emplace_back("(intercept)");
  d.rows.resize(n, static_cast<Eigen::Index>(predictors.size()) + 1);
  d.rows.col(0).setOnes();
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    const auto& col = predictors[j];
    if (static_cast<Eigen::Index>(col.values.size()) != n) {
      throw DomainError("predictor '" + col.name + "' has the wrong length");
    }
    std::vector<double> z;
    try {
      z = standardize(col.values);
    } catch (const ConstantColumn&) {
      throw ConstantColumn("column '" + col.name + "' is constant");
    }
    d.column_names.push_back(col.name);
    d.rows.col(static_cast<Eigen::Index>(j) + 1) = Eigen::Map<const Eigen::VectorXd>(z.data(), n);
  }
  if (standardize_outcome) {
    std::vector<double> z;
    try {
      z = standardize(outcome);
    } catch (const ConstantColumn&) {
      throw ConstantColumn("outcome is constant");
    }
    d.outcome = Eigen::Map<const Eigen::VectorXd>(z.data(), n);
  } else {
    d.outcome = Eigen::Map<const Eigen::VectorXd>(outcome.data(), n);
  }
  return d;
}

}  // namespace langtraj
