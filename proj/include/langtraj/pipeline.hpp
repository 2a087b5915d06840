#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "langtraj/assessment.hpp"
#include "langtraj/associations.hpp"
#include "langtraj/cohort.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/lexica.hpp"
#include "langtraj/reporting.hpp"
#include "langtraj/trajectory.hpp"

namespace langtraj {

/// An error raised inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct AnalysisToggles {
  bool concurrent = true;
  bool trajectory = true;
  bool suppression = true;
  bool mediation = true;
  bool joint = true;
  bool tertiles = true;
};

/// Declarative run description (JSON). Relative paths are resolved against
/// the directory of the config file.
struct RunConfig {
  std::filesystem::path transcripts;
  std::filesystem::path pcl;
  std::filesystem::path demographics;
  std::filesystem::path bundle;
  AnalysisToggles analyses;
  double alpha = 0.05;
  std::filesystem::path out = "results";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  /// Throws ConfigError: alpha outside (0, 1), or a missing input path.
  void validate() const;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::ordered_json to_json() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

struct CohortInputs {
  std::vector<Transcript> transcripts;
  std::vector<PclRecord> pcl;
  std::vector<Demographics> demographics;  // years_since_911 resolved
  AnalysisSample sample;
};

/// Parses the three cohort files and applies the inclusion criteria.
CohortInputs ingest(const RunConfig& config);

/// Header: responder_id,baseline_date,baseline_pcl,pre_count,post_count,
///         eligible_concurrent,eligible_trajectory
void write_sample_table(std::ostream& out, const AnalysisSample& sample);

struct AnalysisInputs {
  const CohortInputs& cohort;
  const AssessmentTable& assessments;
  const PclPanel& panel;
  std::span<const TrajectoryFit> trajectories;
};

/// Results of the enabled analyses; disabled ones stay empty.
struct AnalysisOutputs {
  std::vector<AssociationResult> concurrent;
  std::vector<AssociationResult> trajectory;
  std::vector<SuppressionRow> suppression;
  std::vector<MediationResult> mediation_concurrent;
  std::vector<MediationResult> mediation_trajectory;
  std::vector<JointEstimate> joint;
  std::vector<TertilePair> tertiles;
};

AnalysisOutputs compute_analyses(const AnalysisInputs& inputs, const RunConfig& config);

/// Writes result tables (CSV with manifest comments), rendered Markdown
/// tables and tertile plots into `dir`. Returns the artifact names relative
/// to `dir`, in writing order.
std::vector<std::string> write_analyses(const AnalysisOutputs& outputs, const Manifest& manifest,
                                        const std::filesystem::path& dir);

struct RunSummary {
  std::filesystem::path out;
  std::vector<std::string> artifacts;
};

/// ingest -> assess -> trajectory -> inference -> report, then manifest.json.
/// A failing stage still writes a manifest marking that stage failed and
/// the later ones skipped, then throws StageError.
RunSummary run_pipeline(const RunConfig& config);

/// Manifest key/value pairs common to every results table of one run.
Manifest results_manifest(const RunConfig& config, std::string_view bundle_id);

}  // namespace langtraj
