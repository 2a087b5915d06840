#include "langtraj/assessment.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "langtraj/csv.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/parallel.hpp"

namespace langtraj {

std::optional<Assessment> parse_assessment_name(std::string_view name) {
  for (std::size_t i = 0; i < kAssessmentNames.size(); ++i) {
    if (kAssessmentNames[i] == name) return static_cast<Assessment>(i);
  }
  return std::nullopt;
}

const AssessmentRecord* AssessmentTable::find(std::string_view responder_id) const {
  for (const auto& r : records) {
    if (r.responder_id == responder_id) return &r;
  }
  return nullptr;
}

AssessmentRecord assess_responder(const Transcript& transcript, const ModelBundle& bundle) {
  bundle.validate();
  const auto tokens = responder_tokens(transcript);
  const auto meta = meta_features(tokens);
  if (meta.word_count == 0) {
    throw EmptySpeech("responder " + transcript.responder_id + " has no tokens in their own speech");
  }
  const auto features = extract_ngrams(tokens, kMaxNGramOrder, FeatureMode::relative_frequency);
  const auto topic_scores = score_topics(features, bundle.topics);
  const auto categories = score_categories(features, bundle.lexicon);

  AssessmentRecord rec;
  rec.responder_id = transcript.responder_id;
  rec[Assessment::anxiety] = apply_trait_model(features, topic_scores, bundle.traits.find("anxiety")->second);
  rec[Assessment::depression] =
      apply_trait_model(features, topic_scores, bundle.traits.find("depression")->second);
  rec[Assessment::neuroticism] =
      apply_trait_model(features, topic_scores, bundle.traits.find("neuroticism")->second);
  rec[Assessment::extraversion] =
      apply_trait_model(features, topic_scores, bundle.traits.find("extraversion")->second);
  rec[Assessment::first_person_singular] = categories.find("first_person_singular")->second;
  rec[Assessment::first_person_plural] = categories.find("first_person_plural")->second;
  rec[Assessment::articles] = categories.find("articles")->second;
  rec[Assessment::avg_word_length] = meta.avg_word_length;
  rec[Assessment::word_count] = static_cast<double>(meta.word_count);
  return rec;
}

AssessmentTable assess_cohort(std::span<const Transcript> transcripts, const ModelBundle& bundle, unsigned jobs) {
  bundle.validate();
  {
    std::set<std::string_view> ids;
    for (const auto& t : transcripts) {
      if (!ids.insert(t.responder_id).second) throw SchemaError("duplicate responder_id " + t.responder_id);
    }
  }

  std::vector<std::optional<AssessmentRecord>> results(transcripts.size());
  std::vector<std::string> failures(transcripts.size());
  parallel_for(transcripts.size(), jobs, [&](std::size_t i) {
    try {
      results[i] = assess_responder(transcripts[i], bundle);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  AssessmentTable table;
  table.bundle_id = bundle.id;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto& id = transcripts[i].responder_id;
    if (!results[i]) {
      spdlog::info("excluding {}: {}", id, failures[i]);
      table.exclusions.push_back({id, failures[i]});
      continue;
    }
    const double wc = (*results[i])[Assessment::word_count];
    if (wc < static_cast<double>(kLowDataFlagWords)) {
      table.warnings.push_back(id + ": very low data (" + csv::format_double(wc) + " words)");
    } else if (wc < static_cast<double>(kLowDataWarnWords)) {
      table.warnings.push_back(id + ": low data (" + csv::format_double(wc) + " words)");
    }
    table.records.push_back(std::move(*results[i]));
  }
  for (const auto& w : table.warnings) spdlog::warn("{}", w);
  if (table.records.empty()) {
    throw CohortEmpty("no responder could be assessed (" + std::to_string(table.exclusions.size()) + " excluded)");
  }
  return table;
}

void write_assessment_table(std::ostream& out, const AssessmentTable& table) {
  out << "# bundle_id=" << table.bundle_id << '\n';
  out << "# pipeline_version=" << table.pipeline_version << '\n';
  for (const auto& ex : table.exclusions) out << "# excluded=" << ex.responder_id << '\n';
  std::vector<std::string> header{"responder_id"};
  for (auto name : kAssessmentNames) header.emplace_back(name);
  csv::write_row(out, header);
  std::vector<std::string> row(header.size());
  for (const auto& r : table.records) {
    row[0] = r.responder_id;
    for (std::size_t k = 0; k < kAssessmentCount; ++k) row[k + 1] = csv::format_double(r.scores[k]);
    csv::write_row(out, row);
  }
}

AssessmentTable read_assessment_table(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  AssessmentTable table;
  table.pipeline_version.clear();
  for (const auto& c : reader.comments()) {
    if (c.starts_with("# bundle_id=")) table.bundle_id = c.substr(12);
    if (c.starts_with("# pipeline_version=")) table.pipeline_version = c.substr(19);
    if (c.starts_with("# excluded=")) table.exclusions.push_back({c.substr(11), "excluded upstream"});
  }
  const auto id_col = reader.column("responder_id");
  std::array<std::size_t, kAssessmentCount> cols{};
  for (std::size_t k = 0; k < kAssessmentCount; ++k) cols[k] = reader.column(kAssessmentNames[k]);
  std::set<std::string> ids;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    AssessmentRecord r;
    r.responder_id = row->fields[id_col];
    if (!ids.insert(r.responder_id).second) throw ParseError(where + ": duplicate responder_id " + r.responder_id);
    for (std::size_t k = 0; k < kAssessmentCount; ++k) r.scores[k] = csv::parse_double(row->fields[cols[k]], where);
    table.records.push_back(std::move(r));
  }
  return table;
}

}  // namespace langtraj
