#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "langtraj/dates.hpp"

namespace langtraj {

enum class Speaker { responder, interviewer };

struct Utterance {
  double start_time = 0.0;  // seconds from interview start
  Speaker speaker = Speaker::responder;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

struct Transcript {
  std::string responder_id;
  Date interview_date;
  std::vector<Utterance> utterances;  // sorted by start_time

  bool operator==(const Transcript&) const = default;
};

/// One PTSD Checklist administration; score lies in [17, 85].
struct PclRecord {
  std::string responder_id;
  Date date;
  double score = 0.0;

  bool operator==(const PclRecord&) const = default;
};

inline constexpr double kPclMin = 17.0;
inline constexpr double kPclMax = 85.0;
/// Baseline window and the follow-up requirement, both two years in days.
inline constexpr long kTwoYearsDays = 730;

enum class Gender { male, female };
enum class MaritalStatus { married, not_married, unknown };

/// Covariates for one responder. Empty cells in the source table are
/// represented as nullopt and handled by listwise deletion downstream.
struct Demographics {
  std::string responder_id;
  std::optional<double> age_at_interview;
  std::optional<Gender> gender;
  std::optional<bool> occupation_police;
  MaritalStatus marital_status = MaritalStatus::unknown;
  std::optional<double> years_since_911;

  bool operator==(const Demographics&) const = default;
};

struct SampleEntry {
  std::string responder_id;
  std::optional<PclRecord> baseline_pcl;
  int pre_interview_count = 0;
  int post_interview_count = 0;
  bool eligible_concurrent = false;
  bool eligible_trajectory = false;
};

struct AnalysisSample {
  std::vector<SampleEntry> entries;  // transcript order

  std::size_t concurrent_count() const;
  std::size_t trajectory_count() const;
  const SampleEntry* find(std::string_view responder_id) const;
};

// Parsing. Every parser reports the offending line as "<source>:<line>".

/// One JSON object per line:
/// {"responder_id", "interview_date", "utterances": [{"t", "speaker", "text"}]}
std::vector<Transcript> parse_transcripts(std::istream& in, std::string_view source = "transcripts");
void write_transcripts(std::ostream& out, std::span<const Transcript> transcripts);

/// Header: responder_id,date,pcl
std::vector<PclRecord> parse_pcl_records(std::istream& in, std::string_view source = "pcl");
void write_pcl_records(std::ostream& out, std::span<const PclRecord> records);

/// Header: responder_id,age,gender,police,marital_status[,years_since_911]
std::vector<Demographics> parse_demographics(std::istream& in, std::string_view source = "demographics");
void write_demographics(std::ostream& out, std::span<const Demographics> demographics);

std::string_view to_string(Speaker speaker);
std::string_view to_string(Gender gender);
std::string_view to_string(MaritalStatus status);

// Selection and eligibility.

/// Record closest to the interview date within 730 days; ties go to the
/// earlier record. nullopt when nothing is in range.
std::optional<PclRecord> find_baseline_pcl(std::span<const PclRecord> records, Date interview_date);
/// As find_baseline_pcl but throws NoBaseline.
PclRecord select_baseline_pcl(std::span<const PclRecord> records, Date interview_date);

/// Eligibility per transcript. Demographics are cross-checked: a recorded
/// years_since_911 must agree with the interview date within 0.1 years.
AnalysisSample apply_inclusion_criteria(std::span<const Transcript> transcripts,
                                        std::span<const PclRecord> pcl_records,
                                        std::span<const Demographics> demographics);

/// Fills missing years_since_911 from interview dates and validates present ones.
void resolve_years_since_911(std::span<Demographics> demographics, std::span<const Transcript> transcripts);

/// Records belonging to one responder, in input order.
std::vector<PclRecord> records_for(std::span<const PclRecord> records, std::string_view responder_id);

}  // namespace langtraj
