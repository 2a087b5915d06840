#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "langtraj/stats.hpp"

namespace langtraj {

/// Regression design: one row per responder (or observation), one named
/// column per regressor, plus the outcome vector.
struct DesignMatrix {
  std::vector<std::string> column_names;
  Eigen::MatrixXd rows;
  Eigen::VectorXd outcome;
};

struct OlsFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;  // two-sided, t distribution with df
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double sigma2 = 0.0;
  double df = 0.0;

  std::size_t index(std::string_view name) const;
  /// Coefficient +/- t_{(1+level)/2, df} * SE.
  Interval ci(std::size_t j, double level = 0.95) const;
};

/// Least squares via column-pivoted Householder QR.
///
/// `absorbed_parameters` counts parameters projected out before the call
/// (e.g. per-subject intercepts removed by demeaning) so that the residual
/// degrees of freedom stay n - k - absorbed. Throws SingularDesign naming
/// the dependent columns when the design is rank deficient, and
/// SampleTooSmall when no residual degrees of freedom remain.
OlsFit ols(const DesignMatrix& design, std::size_t absorbed_parameters = 0);

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

/// Intercept column plus each predictor z-scored; the outcome is z-scored
/// too when `standardize_outcome` is set.
DesignMatrix standardized_design(std::span<const double> outcome, std::span<const NamedColumn> predictors,
                                 bool standardize_outcome = true);

}  // namespace langtraj
