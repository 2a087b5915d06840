#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "langtraj/assessment.hpp"
#include "langtraj/cohort.hpp"
#include "langtraj/lexica.hpp"
#include "langtraj/reporting.hpp"

// Synthetic cohorts with planted effects.
//
// Every subject owns a std::mt19937_64 stream seeded with
// splitmix64(seed + splitmix64(index + 1)); uniforms are (x >> 11) * 2^-53
// and normals come from Box-Muller (one draw per pair of uniforms), so the
// output is identical on every platform and for every job count.
//
// Planted effects act on the generator's own realized features, computed
// from its token counts exactly as the pipeline computes them and then
// standardized over the cohort. That makes the planted standardized
// coefficient the estimand of the trajectory regression.
namespace langtraj {

/// Planted effect of one standardized variable, in SD units of the target:
/// `cross_sectional` on the baseline PCL latent, `longitudinal` on the slope.
struct PlantedEffect {
  double cross_sectional = 0.0;
  double longitudinal = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_subjects = 500;
  double words_per_subject = 10000;
  double word_count_log_sd = 0.3;
  int visits_per_subject = 5;  // one pre-interview baseline + post-interview visits
  double follow_up_years = 4.0;
  int visit_jitter_days = 30;

  double baseline_mean = 33.7;
  double baseline_sd = 16.2;
  double slope_mean = -0.2;  // PCL units per year
  double slope_sd = 1.5;
  double pcl_noise_sd = 1.0;

  /// Keyed by assessment name; absent features have no effect.
  std::map<std::string, PlantedEffect, std::less<>> feature_effects;
  /// Keyed by age, gender, occupation, years_since_911.
  std::map<std::string, PlantedEffect, std::less<>> covariate_effects;
  /// Standardized interview PCL on the standardized slope.
  double baseline_on_slope = 0.0;

  /// Logit shift per SD of a subject's latent trait for each marker category.
  double marker_link = 0.4;
  /// Base emission probability per marker category (fps, fpp, articles,
  /// anxiety, depression, neuroticism, extraversion).
  std::map<std::string, double, std::less<>> base_rates;
  double long_word_rate = 0.25;  // share of long words among filler
  double interviewer_turn_rate = 0.3;

  double age_mean = 53.0;
  double age_sd = 8.0;
  double female_rate = 0.1;
  double police_rate = 0.48;
  double married_rate = 0.65;
  double marital_unknown_rate = 0.05;
  /// Probability that each demographic cell is left blank.
  double missing_rate = 0.0;

  /// Makes the slope residual exactly orthogonal to every planted regressor
  /// in-sample (noise-free identification checks only).
  bool exact_residuals = false;

  SynthConfig();

  /// Throws ConfigError for infeasible settings.
  void validate() const;

  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

SynthConfig load_synth_config(const std::filesystem::path& path);

struct SubjectTruth {
  std::string responder_id;
  double baseline_pcl = 0.0;
  double slope = 0.0;                            // PCL units per year
  std::array<double, kAssessmentCount> features{};  // realized, unstandardized
  std::map<std::string, double, std::less<>> latent;
  std::map<std::string, double, std::less<>> expected_rate;  // per marker category
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<SubjectTruth> subjects;
  std::map<std::string, PlantedEffect, std::less<>> feature_effects;  // all nine features
  double baseline_on_slope = 0.0;
  std::size_t post_records = 0;
  std::size_t clipped_records = 0;

  double clip_rate() const {
    return post_records ? static_cast<double>(clipped_records) / static_cast<double>(post_records) : 0.0;
  }
  nlohmann::ordered_json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
};

struct SyntheticCohort {
  std::vector<Transcript> transcripts;
  std::vector<PclRecord> pcl;
  std::vector<Demographics> demographics;
  ModelBundle bundle;
  GroundTruth truth;
};

/// Word lists behind each marker category of the generated vocabulary.
const std::map<std::string, std::vector<std::string>, std::less<>>& synth_vocabulary();
/// Lexicon, topic model and trait models matching the generated vocabulary.
ModelBundle synth_bundle();

SyntheticCohort generate_cohort(const SynthConfig& config, unsigned jobs = 1);

/// transcripts.jsonl, pcl.csv, demographics.csv, bundle/, config.json and
/// ground_truth.json.
void write_cohort(const std::filesystem::path& dir, const SyntheticCohort& cohort, const SynthConfig& config);

struct OracleRow {
  std::string feature_name;
  double truth = 0.0;
  double estimate = 0.0;
  Interval ci;
  bool covered = false;
  bool significant = false;
  double abs_error = 0.0;
};

struct OracleReport {
  std::uint64_t seed = 0;
  std::vector<OracleRow> rows;  // one per feature, planted and null
  double coverage_rate = 0.0;
  double max_abs_error = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// Compares trajectory-association betas with the planted longitudinal
/// effects. The results manifest must carry the generator seed; a missing
/// or different seed raises ProvenanceError.
OracleReport oracle_report(const GroundTruth& truth, const AssociationResults& trajectory_results);

}  // namespace langtraj
