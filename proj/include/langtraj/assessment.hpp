#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "langtraj/cohort.hpp"
#include "langtraj/lexica.hpp"

namespace langtraj {

inline constexpr std::string_view kPipelineVersion = LANGTRAJ_VERSION;

/// The nine language-based assessments, in reporting order.
enum class Assessment : std::size_t {
  anxiety,
  depression,
  neuroticism,
  extraversion,
  first_person_singular,
  first_person_plural,
  articles,
  avg_word_length,
  word_count,
};

inline constexpr std::size_t kAssessmentCount = 9;
inline constexpr std::array<std::string_view, kAssessmentCount> kAssessmentNames = {
    "anxiety",  "depression", "neuroticism",     "extraversion", "first_person_singular",
    "first_person_plural", "articles", "avg_word_length", "word_count"};

std::optional<Assessment> parse_assessment_name(std::string_view name);

/// Below these token counts a responder gets a low-data warning / hard flag.
inline constexpr std::uint64_t kLowDataWarnWords = 200;
inline constexpr std::uint64_t kLowDataFlagWords = 50;

struct AssessmentRecord {
  std::string responder_id;
  std::array<double, kAssessmentCount> scores{};

  double operator[](Assessment a) const { return scores[static_cast<std::size_t>(a)]; }
  double& operator[](Assessment a) { return scores[static_cast<std::size_t>(a)]; }
  bool low_data() const { return (*this)[Assessment::word_count] < static_cast<double>(kLowDataFlagWords); }
};

struct Exclusion {
  std::string responder_id;
  std::string reason;
};

struct AssessmentTable {
  std::vector<AssessmentRecord> records;  // input order
  std::vector<Exclusion> exclusions;
  std::vector<std::string> warnings;
  std::string bundle_id;
  std::string pipeline_version{kPipelineVersion};

  const AssessmentRecord* find(std::string_view responder_id) const;
};

/// tokenize -> n-grams -> topic/category/trait scores + meta features.
/// Throws EmptySpeech when the responder has no tokens.
AssessmentRecord assess_responder(const Transcript& transcript, const ModelBundle& bundle);

/// One record per assessable transcript, in input order. Failures are
/// collected as exclusions; throws CohortEmpty if every responder fails.
/// The output does not depend on `jobs`.
AssessmentTable assess_cohort(std::span<const Transcript> transcripts, const ModelBundle& bundle,
                              unsigned jobs = 1);

/// responder_id + nine named columns; bundle and version as '#' comments.
void write_assessment_table(std::ostream& out, const AssessmentTable& table);
AssessmentTable read_assessment_table(std::istream& in, std::string_view source = "assessments");

}  // namespace langtraj
