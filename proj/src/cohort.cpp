#include "langtraj/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "langtraj/csv.hpp"
#include "langtraj/errors.hpp"

namespace langtraj {

namespace {

using ordered_json = nlohmann::ordered_json;

Speaker parse_speaker(std::string_view text, const std::string& where) {
  if (text == "responder") return Speaker::responder;
  if (text == "interviewer") return Speaker::interviewer;
  throw ParseError(where + ": unknown speaker '" + std::string(text) + "'");
}

template <typename T>
T require_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(where + ": record missing '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::responder ? "responder" : "interviewer";
}

std::string_view to_string(Gender gender) {
  return gender == Gender::female ? "female" : "male";
}

std::string_view to_string(MaritalStatus status) {
  switch (status) {
    case MaritalStatus::married: return "married";
    case MaritalStatus::not_married: return "not_married";
    case MaritalStatus::unknown: break;
  }
  return "unknown";
}

std::size_t AnalysisSample::concurrent_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.eligible_concurrent; }));
}

std::size_t AnalysisSample::trajectory_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.eligible_trajectory; }));
}

const SampleEntry* AnalysisSample::find(std::string_view responder_id) const {
  for (const auto& e : entries) {
    if (e.responder_id == responder_id) return &e;
  }
  return nullptr;
}

std::vector<Transcript> parse_transcripts(std::istream& in, std::string_view source) {
  std::vector<Transcript> out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw ParseError(where + ": expected a JSON object");

    Transcript t;
    t.responder_id = require_field<std::string>(rec, "responder_id", where);
    if (t.responder_id.empty()) throw ParseError(where + ": empty responder_id");
    try {
      t.interview_date = parse_iso_date(require_field<std::string>(rec, "interview_date", where));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }

    auto utts = rec.find("utterances");
    if (utts == rec.end() || !utts->is_array()) {
      throw ParseError(where + ": record missing 'utterances' array");
    }
    bool has_responder = false;
    for (const auto& u : *utts) {
      if (!u.is_object()) throw ParseError(where + ": utterance is not an object");
      Utterance utt;
      utt.start_time = require_field<double>(u, "t", where);
      if (!(utt.start_time >= 0.0) || !std::isfinite(utt.start_time)) {
        throw ParseError(where + ": utterance time must be a non-negative number");
      }
      utt.speaker = parse_speaker(require_field<std::string>(u, "speaker", where), where);
      utt.text = require_field<std::string>(u, "text", where);
      has_responder = has_responder || utt.speaker == Speaker::responder;
      t.utterances.push_back(std::move(utt));
    }
    if (!has_responder) {
      throw ParseError(where + ": transcript " + t.responder_id + " has no responder utterance");
    }
    std::stable_sort(t.utterances.begin(), t.utterances.end(),
                     [](const Utterance& a, const Utterance& b) { return a.start_time < b.start_time; });

    if (!seen.insert(t.responder_id).second) {
      throw ParseError(where + ": duplicate responder_id " + t.responder_id);
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_transcripts(std::ostream& out, std::span<const Transcript> transcripts) {
  for (const auto& t : transcripts) {
    ordered_json rec;
    rec["responder_id"] = t.responder_id;
    rec["interview_date"] = format_iso_date(t.interview_date);
    ordered_json utts = ordered_json::array();
    for (const auto& u : t.utterances) {
      ordered_json j;
      j["t"] = u.start_time;
      j["speaker"] = std::string(to_string(u.speaker));
      j["text"] = u.text;
      utts.push_back(std::move(j));
    }
    rec["utterances"] = std::move(utts);
    out << rec.dump() << '\n';
  }
}

std::vector<PclRecord> parse_pcl_records(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto id_col = reader.column("responder_id");
  const auto date_col = reader.column("date");
  const auto pcl_col = reader.column("pcl");
  std::vector<PclRecord> out;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    PclRecord r;
    r.responder_id = row->fields[id_col];
    if (r.responder_id.empty()) throw ParseError(where + ": empty responder_id");
    try {
      r.date = parse_iso_date(row->fields[date_col]);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    r.score = csv::parse_double(row->fields[pcl_col], where);
    if (!(r.score >= kPclMin && r.score <= kPclMax)) {
      throw ParseError(where + ": PCL score " + row->fields[pcl_col] + " outside [17, 85]");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_pcl_records(std::ostream& out, std::span<const PclRecord> records) {
  csv::write_row(out, {"responder_id", "date", "pcl"});
  for (const auto& r : records) {
    csv::write_row(out, {r.responder_id, format_iso_date(r.date), csv::format_double(r.score)});
  }
}

std::vector<Demographics> parse_demographics(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto id_col = reader.column("responder_id");
  const auto age_col = reader.column("age");
  const auto gender_col = reader.column("gender");
  const auto police_col = reader.column("police");
  const auto marital_col = reader.column("marital_status");
  const auto years_col = reader.find_column("years_since_911");

  std::vector<Demographics> out;
  std::set<std::string, std::less<>> seen;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    const auto& f = row->fields;
    Demographics d;
    d.responder_id = f[id_col];
    if (d.responder_id.empty()) throw ParseError(where + ": empty responder_id");
    if (!seen.insert(d.responder_id).second) {
      throw ParseError(where + ": duplicate responder_id " + d.responder_id);
    }
    if (!f[age_col].empty()) {
      d.age_at_interview = csv::parse_double(f[age_col], where);
      if (!(*d.age_at_interview > 0.0)) throw ParseError(where + ": age must be positive");
    }
    if (f[gender_col] == "male") {
      d.gender = Gender::male;
    } else if (f[gender_col] == "female") {
      d.gender = Gender::female;
    } else if (!f[gender_col].empty()) {
      throw ParseError(where + ": unknown gender '" + f[gender_col] + "'");
    }
    const auto& police = f[police_col];
    if (police == "1" || police == "true") {
      d.occupation_police = true;
    } else if (police == "0" || police == "false") {
      d.occupation_police = false;
    } else if (!police.empty()) {
      throw ParseError(where + ": police flag must be 0 or 1, got '" + police + "'");
    }
    const auto& marital = f[marital_col];
    if (marital == "married") {
      d.marital_status = MaritalStatus::married;
    } else if (marital == "not_married") {
      d.marital_status = MaritalStatus::not_married;
    } else if (marital == "unknown" || marital.empty()) {
      d.marital_status = MaritalStatus::unknown;
    } else {
      throw ParseError(where + ": unknown marital_status '" + marital + "'");
    }
    if (years_col && !f[*years_col].empty()) {
      d.years_since_911 = csv::parse_double(f[*years_col], where);
      if (*d.years_since_911 < 0.0) throw ParseError(where + ": years_since_911 must be >= 0");
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_demographics(std::ostream& out, std::span<const Demographics> demographics) {
  csv::write_row(out, {"responder_id", "age", "gender", "police", "marital_status", "years_since_911"});
  for (const auto& d : demographics) {
    csv::write_row(out, {d.responder_id,
                         d.age_at_interview ? csv::format_double(*d.age_at_interview) : "",
                         d.gender ? std::string(to_string(*d.gender)) : "",
                         d.occupation_police ? (*d.occupation_police ? "1" : "0") : "",
                         std::string(to_string(d.marital_status)),
                         d.years_since_911 ? csv::format_double(*d.years_since_911) : ""});
  }
}

std::optional<PclRecord> find_baseline_pcl(std::span<const PclRecord> records, Date interview_date) {
  const PclRecord* best = nullptr;
  long best_gap = 0;
  for (const auto& r : records) {
    const long signed_gap = days_between(interview_date, r.date);
    const long gap = signed_gap < 0 ? -signed_gap : signed_gap;
    if (gap > kTwoYearsDays) continue;
    // Equal gaps resolve to the earlier date, whatever the input order.
    if (!best || gap < best_gap || (gap == best_gap && r.date < best->date)) {
      best = &r;
      best_gap = gap;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

PclRecord select_baseline_pcl(std::span<const PclRecord> records, Date interview_date) {
  if (auto r = find_baseline_pcl(records, interview_date)) return *r;
  const std::string who = records.empty() ? std::string("responder") : records.front().responder_id;
  throw NoBaseline("no PCL record within 730 days of the interview for " + who);
}

std::vector<PclRecord> records_for(std::span<const PclRecord> records, std::string_view responder_id) {
  std::vector<PclRecord> out;
  for (const auto& r : records) {
    if (r.responder_id == responder_id) out.push_back(r);
  }
  return out;
}

void resolve_years_since_911(std::span<Demographics> demographics, std::span<const Transcript> transcripts) {
  std::map<std::string, Date, std::less<>> dates;
  for (const auto& t : transcripts) dates.emplace(t.responder_id, t.interview_date);
  for (auto& d : demographics) {
    auto it = dates.find(d.responder_id);
    if (it == dates.end()) continue;
    const double derived = years_since_911(it->second);
    if (d.years_since_911) {
      if (std::abs(*d.years_since_911 - derived) > 0.1) {
        throw SchemaError("years_since_911 for " + d.responder_id + " disagrees with interview date " +
                          format_iso_date(it->second));
      }
    } else {
      d.years_since_911 = derived;
    }
  }
}

AnalysisSample apply_inclusion_criteria(std::span<const Transcript> transcripts,
                                        std::span<const PclRecord> pcl_records,
                                        std::span<const Demographics> demographics) {
  {
    std::vector<Demographics> copy(demographics.begin(), demographics.end());
    resolve_years_since_911(copy, transcripts);  // validation only
  }

  std::map<std::string, std::vector<PclRecord>, std::less<>> by_id;
  for (const auto& r : pcl_records) by_id[r.responder_id].push_back(r);

  AnalysisSample sample;
  sample.entries.reserve(transcripts.size());
  for (const auto& t : transcripts) {
    SampleEntry e;
    e.responder_id = t.responder_id;
    auto it = by_id.find(t.responder_id);
    if (it != by_id.end()) {
      const auto& recs = it->second;
      e.baseline_pcl = find_baseline_pcl(recs, t.interview_date);
      long latest_post = -1;
      for (const auto& r : recs) {
        const long d = days_between(t.interview_date, r.date);
        if (d < 0) ++e.pre_interview_count;
        if (d > 0) {
          ++e.post_interview_count;
          latest_post = std::max(latest_post, d);
        }
      }
      e.eligible_concurrent = e.baseline_pcl.has_value() && e.pre_interview_count >= 1;
      e.eligible_trajectory = e.eligible_concurrent && e.post_interview_count >= 3 &&
                              latest_post >= kTwoYearsDays;
    }
    sample.entries.push_back(std::move(e));
  }
  return sample;
}

}  // namespace langtraj
