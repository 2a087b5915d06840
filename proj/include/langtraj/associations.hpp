#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langtraj/assessment.hpp"
#include "langtraj/cohort.hpp"
#include "langtraj/stats.hpp"
#include "langtraj/trajectory.hpp"

namespace langtraj {

// Analysis variable names. Binary covariates: gender is 1 for female,
// occupation is 1 for police, marital_status is 1 for married.
inline constexpr std::string_view kAgeColumn = "age";
inline constexpr std::string_view kGenderColumn = "gender";
inline constexpr std::string_view kOccupationColumn = "occupation";
inline constexpr std::string_view kYearsSince911Column = "years_since_911";
inline constexpr std::string_view kInterviewPclColumn = "interview_pcl";
inline constexpr std::string_view kMaritalColumn = "marital_status";
inline constexpr std::string_view kSlopeColumn = "slope";

std::vector<std::string> concurrent_covariates();
/// Occupation, gender, years since 9/11, interview PCL, age.
std::vector<std::string> trajectory_covariates();
std::vector<std::string> assessment_features();

/// Per-responder analysis variables; missing cells are nullopt. Every
/// analysis applies listwise deletion over exactly the columns it uses and
/// standardizes afterwards, so dropped responders never leak into another
/// analysis' means or SDs.
class AnalysisFrame {
 public:
  using Column = std::vector<std::optional<double>>;

  AnalysisFrame() = default;
  explicit AnalysisFrame(std::vector<std::string> ids);

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  void set_column(const std::string& name, Column values);
  bool has_column(std::string_view name) const;
  const Column& column(std::string_view name) const;
  std::vector<std::string> column_names() const;

  struct CompleteCases {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> columns;  // same order as requested
  };
  CompleteCases complete_cases(std::span<const std::string> names) const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, Column, std::less<>> columns_;
};

enum class Eligibility { concurrent, trajectory };

/// One row per eligible responder that also has an assessment record.
/// Demographics should have years_since_911 resolved (see
/// resolve_years_since_911); a missing value is treated as a missing cell.
AnalysisFrame build_analysis_frame(const AssessmentTable& assessments, const AnalysisSample& sample,
                                   std::span<const Demographics> demographics,
                                   std::span<const TrajectoryFit> trajectories, Eligibility eligibility);

struct Estimate {
  double value = 0.0;
  Interval ci;
  double p_raw = 1.0;
  double p_adj = 1.0;
  bool significant = false;
};

/// Unadjusted correlation (r, Fisher-z CI) and covariate-adjusted
/// standardized coefficient (beta, t-based CI) of one feature.
struct AssociationResult {
  std::string feature_name;
  std::size_t n = 0;
  Estimate r;
  Estimate beta;
};

struct AnalysisOptions {
  double alpha = 0.05;
  double level = 0.95;
  std::size_t min_n = 10;
};

/// Single-feature association without multiple-testing adjustment
/// (p_adj = p_raw). r and beta share one complete-case set.
AssociationResult estimate_association(const AnalysisFrame& frame, std::string_view feature,
                                       std::string_view outcome, std::span<const std::string> covariates,
                                       const AnalysisOptions& options = {});

/// estimate_association for every feature, then BH adjustment with r and
/// beta treated as separate families.
std::vector<AssociationResult> association_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                                 std::string_view outcome, std::span<const std::string> covariates,
                                                 const AnalysisOptions& options = {});

/// Nine features vs interview PCL, adjusted for age, gender, occupation and
/// years since 9/11.
std::vector<AssociationResult> concurrent_associations(const AnalysisFrame& frame,
                                                       const AnalysisOptions& options = {});
/// Nine features vs standardized trajectory slope, additionally adjusted for
/// interview PCL.
std::vector<AssociationResult> trajectory_associations(const AnalysisFrame& frame,
                                                       const AnalysisOptions& options = {});

struct SuppressionRow {
  std::string feature_name;
  std::size_t n = 0;
  Estimate unadjusted;
  std::vector<std::pair<std::string, Estimate>> single_covariate;  // covariate order
  Estimate adjusted;
};

/// r, then beta with each covariate alone, then beta with all of them.
SuppressionRow suppression_scan(const AnalysisFrame& frame, std::string_view feature, std::string_view outcome,
                                std::span<const std::string> covariates, const AnalysisOptions& options = {});
/// BH-adjusted per column across features.
std::vector<SuppressionRow> suppression_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                              std::string_view outcome, std::span<const std::string> covariates,
                                              const AnalysisOptions& options = {});

struct MediationResult {
  AssociationResult without_marital;
  AssociationResult with_marital;
};

/// Both models use responders with known marital status, so n matches.
MediationResult marital_mediation(const AnalysisFrame& frame, std::string_view feature, std::string_view outcome,
                                  std::span<const std::string> covariates, const AnalysisOptions& options = {});
std::vector<MediationResult> mediation_table(const AnalysisFrame& frame, std::span<const std::string> features,
                                             std::string_view outcome, std::span<const std::string> covariates,
                                             const AnalysisOptions& options = {});

/// Language effect on PCL change from the pooled panel model
///   PCL_it = b0_i + (a0 + a1 x1_i + ... ) t + e_it
/// with subject intercepts and standardized x.
struct JointEstimate {
  std::string feature_name;
  double alpha1 = 0.0;  // PCL units per year per SD of the feature
  double se = 0.0;
  Interval ci;
  double p_raw = 1.0;
  double p_adj = 1.0;
  std::size_t n_subjects = 0;
  std::size_t n_observations = 0;
};

JointEstimate joint_model(const PclPanel& panel, const AnalysisFrame& frame, std::string_view feature,
                          std::span<const std::string> covariates, const AnalysisOptions& options = {});
std::vector<JointEstimate> joint_model_table(const PclPanel& panel, const AnalysisFrame& frame,
                                             std::span<const std::string> features,
                                             std::span<const std::string> covariates,
                                             const AnalysisOptions& options = {});

enum class TertileGroup { top, bottom };
std::string_view to_string(TertileGroup group);

struct TertileSeries {
  std::string feature_name;
  TertileGroup group = TertileGroup::top;
  std::vector<std::string> members;
  std::size_t group_size = 0;  // members.size(); kept when read back from plot data
  std::vector<double> grid_t;
  std::vector<double> mean_adjusted_pcl;
  double mean_slope = 0.0;  // mean per-subject slope of adjusted PCL
};

struct TertilePair {
  TertileSeries top;
  TertileSeries bottom;
};

using ScoreMap = std::map<std::string, double, std::less<>>;

/// Top and bottom ceil(N/3) responders by feature score (ties by id).
/// Adjusted PCL is the residual from one cohort-wide regression of PCL on
/// baseline PCL; group curves average per-subject fitted lines on a uniform
/// grid from 0 to the shortest member follow-up.
TertilePair tertile_trajectories(std::string_view feature_name, const ScoreMap& feature_scores,
                                 const PclPanel& panel, const ScoreMap& baseline_pcl,
                                 std::size_t grid_points = 11);

}  // namespace langtraj
