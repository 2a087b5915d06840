#include "langtraj/lexica.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "langtraj/csv.hpp"
#include "langtraj/digest.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"

namespace langtraj {

namespace fs = std::filesystem;

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open bundle file " + path.string());
  return in;
}

}  // namespace

bool CategoryPatterns::matches(std::string_view token) const {
  if (literals.find(token) != literals.end()) return true;
  return std::any_of(stems.begin(), stems.end(), [&](const std::string& stem) { return token.starts_with(stem); });
}

void CategoricalLexicon::add(std::string_view category, std::string_view pattern) {
  if (category.empty()) throw SchemaError("lexicon category name is empty");
  if (pattern.empty()) throw SchemaError("empty pattern in category " + std::string(category));
  auto& cat = categories[std::string(category)];
  if (pattern.back() == '*') {
    if (pattern.size() == 1) throw SchemaError("bare '*' pattern in category " + std::string(category));
    cat.stems.insert(ascii_lower(pattern.substr(0, pattern.size() - 1)));
  } else {
    cat.literals.insert(ascii_lower(pattern));
  }
}

void TopicModel::add(const std::string& topic_id, const std::string& word, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw SchemaError("topic weight for (" + topic_id + ", " + word + ") must be finite and >= 0");
  }
  auto [it, inserted] = topics_[topic_id].emplace(word, weight);
  if (!inserted) throw SchemaError("duplicate topic entry (" + topic_id + ", " + word + ")");
  auto& list = by_word_[word];
  auto pos = std::lower_bound(list.begin(), list.end(), topic_id,
                              [](const auto& p, const std::string& t) { return p.first < t; });
  list.emplace(pos, topic_id, weight);
}

std::span<const std::pair<std::string, double>> TopicModel::word_topics(std::string_view word) const {
  auto it = by_word_.find(word);
  if (it == by_word_.end()) return {};
  return it->second;
}

std::vector<std::string> TopicModel::vocabulary() const {
  std::vector<std::string> out;
  out.reserve(by_word_.size());
  for (const auto& [w, _] : by_word_) out.push_back(w);
  return out;
}

FeatureRef FeatureRef::parse(std::string_view text, FeatureMode mode) {
  FeatureRef ref;
  ref.mode = mode;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw ParseError("feature reference '" + std::string(text) + "' must look like topic:ID or <n>gram:words");
  }
  const auto prefix = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  if (prefix == "topic") {
    ref.kind = Kind::topic;
    ref.topic_id = std::string(body);
    return ref;
  }
  if (prefix.size() == 5 && prefix.substr(1) == "gram" && prefix[0] >= '1' && prefix[0] <= '3') {
    const int order = prefix[0] - '0';
    auto tokens = tokenize(body);
    if (static_cast<int>(tokens.size()) != order) {
      throw ParseError("feature reference '" + std::string(text) + "' does not have " + std::to_string(order) +
                       " term(s)");
    }
    ref.kind = Kind::ngram;
    ref.ngram = NGramKey::from_terms(tokens);
    return ref;
  }
  throw ParseError("unknown feature reference kind '" + std::string(prefix) + "'");
}

std::string FeatureRef::str() const {
  if (kind == Kind::topic) return "topic:" + topic_id;
  return std::to_string(ngram.order) + "gram:" + ngram.text;
}

void ModelBundle::validate() const {
  for (auto name : kTraitNames) {
    if (traits.find(name) == traits.end()) throw SchemaError("missing trait: " + std::string(name));
  }
  for (auto name : kCategoryNames) {
    if (lexicon.categories.find(name) == lexicon.categories.end()) {
      throw SchemaError("missing category: " + std::string(name));
    }
  }
}

CategoricalLexicon parse_lexicon(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto term_col = reader.column("term");
  const auto cat_col = reader.column("category");
  CategoricalLexicon lex;
  while (auto row = reader.next()) {
    try {
      lex.add(row->fields[cat_col], row->fields[term_col]);
    } catch (const SchemaError& e) {
      throw ParseError(reader.where(row->line) + ": " + e.what());
    }
  }
  return lex;
}

TopicModel parse_topic_model(std::istream& in, std::string_view source) {
  csv::Reader reader(in, std::string(source));
  const auto topic_col = reader.column("topic_id");
  const auto word_col = reader.column("word");
  const auto weight_col = reader.column("weight");
  TopicModel model;
  while (auto row = reader.next()) {
    const auto where = reader.where(row->line);
    const double w = csv::parse_double(row->fields[weight_col], where);
    if (row->fields[topic_col].empty() || row->fields[word_col].empty()) {
      throw ParseError(where + ": empty topic_id or word");
    }
    try {
      model.add(row->fields[topic_col], ascii_lower(row->fields[word_col]), w);
    } catch (const SchemaError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return model;
}

TraitModel parse_trait_model(std::istream& in, std::string_view source) {
  const std::string src(source);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(src + ": malformed JSON (" + e.what() + ")");
  }
  TraitModel model;
  try {
    model.trait_name = doc.at("trait").get<std::string>();
    model.intercept = doc.value("intercept", 0.0);
    for (const auto& w : doc.value("weights", nlohmann::json::array())) {
      const auto mode = parse_feature_mode(w.value("mode", std::string("relative_frequency")));
      auto ref = FeatureRef::parse(w.at("feature").get<std::string>(), mode);
      const double weight = w.at("weight").get<double>();
      if (!std::isfinite(weight)) throw ParseError("non-finite weight");
      model.weights.emplace_back(std::move(ref), weight);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(src + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(src + ": " + e.what());
  }
  return model;
}

void write_lexicon(std::ostream& out, const CategoricalLexicon& lexicon) {
  csv::write_row(out, {"term", "category"});
  for (const auto& [name, cat] : lexicon.categories) {
    for (const auto& lit : cat.literals) csv::write_row(out, {lit, name});
    for (const auto& stem : cat.stems) csv::write_row(out, {stem + "*", name});
  }
}

void write_topic_model(std::ostream& out, const TopicModel& model) {
  csv::write_row(out, {"topic_id", "word", "weight"});
  for (const auto& [topic, words] : model.topics()) {
    for (const auto& [word, weight] : words) csv::write_row(out, {topic, word, csv::format_double(weight)});
  }
}

void write_trait_model(std::ostream& out, const TraitModel& model) {
  nlohmann::ordered_json doc;
  doc["trait"] = model.trait_name;
  doc["intercept"] = model.intercept;
  auto weights = nlohmann::ordered_json::array();
  for (const auto& [ref, w] : model.weights) {
    nlohmann::ordered_json j;
    j["feature"] = ref.str();
    j["weight"] = w;
    if (ref.mode == FeatureMode::binary) j["mode"] = "binary";
    weights.push_back(std::move(j));
  }
  doc["weights"] = std::move(weights);
  out << doc.dump(2) << '\n';
}

std::vector<std::string> check_topic_completeness(const TopicModel& model, double tolerance) {
  std::vector<std::string> issues;
  for (const auto& word : model.vocabulary()) {
    CompensatedSum sum;
    for (const auto& [topic, w] : model.word_topics(word)) sum.add(w);
    const double total = sum.value();
    if (std::abs(total - 1.0) > tolerance) {
      issues.push_back("topic weights for '" + word + "' sum to " + csv::format_double(total) + " (expected 1)");
    }
  }
  return issues;
}

ModelBundle load_bundle(const fs::path& dir, double completeness_tolerance) {
  if (!fs::is_directory(dir)) throw SchemaError("bundle directory not found: " + dir.string());
  ModelBundle bundle;
  std::vector<std::pair<std::string, std::string>> digests;

  const auto lex_path = dir / "lexicon.csv";
  {
    auto in = open_input(lex_path);
    bundle.lexicon = parse_lexicon(in, lex_path.string());
  }
  digests.emplace_back("lexicon.csv", sha256_file(lex_path));

  const auto topic_path = dir / "topics.csv";
  {
    auto in = open_input(topic_path);
    bundle.topics = parse_topic_model(in, topic_path.string());
  }
  digests.emplace_back("topics.csv", sha256_file(topic_path));

  std::vector<fs::path> trait_files;
  if (fs::is_directory(dir / "traits")) {
    for (const auto& entry : fs::directory_iterator(dir / "traits")) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") trait_files.push_back(entry.path());
    }
  }
  std::sort(trait_files.begin(), trait_files.end());
  for (const auto& path : trait_files) {
    auto in = open_input(path);
    auto model = parse_trait_model(in, path.string());
    if (std::find(kTraitNames.begin(), kTraitNames.end(), model.trait_name) == kTraitNames.end()) {
      throw SchemaError(path.string() + ": unknown trait '" + model.trait_name + "'");
    }
    const auto name = model.trait_name;
    if (!bundle.traits.emplace(name, std::move(model)).second) {
      throw SchemaError(path.string() + ": duplicate trait '" + name + "'");
    }
    digests.emplace_back("traits/" + path.filename().string(), sha256_file(path));
  }

  bundle.validate();

  bundle.warnings = check_topic_completeness(bundle.topics, completeness_tolerance);
  for (const auto& w : bundle.warnings) spdlog::warn("bundle {}: {}", dir.string(), w);

  std::string manifest;
  for (const auto& [name, digest] : digests) manifest += name + '\0' + digest + '\n';
  bundle.id = sha256_hex(manifest).substr(0, 16);
  return bundle;
}

void write_bundle(const fs::path& dir, const ModelBundle& bundle) {
  fs::create_directories(dir / "traits");
  {
    std::ofstream out(dir / "lexicon.csv", std::ios::binary);
    write_lexicon(out, bundle.lexicon);
  }
  {
    std::ofstream out(dir / "topics.csv", std::ios::binary);
    write_topic_model(out, bundle.topics);
  }
  for (const auto& [name, model] : bundle.traits) {
    std::ofstream out(dir / "traits" / (name + ".json"), std::ios::binary);
    write_trait_model(out, model);
  }
}

CategoryScores score_categories(const FeatureVector& features, const CategoricalLexicon& lexicon) {
  const auto unigrams = features.order_entries(1);
  CategoryScores scores;
  for (const auto& [name, patterns] : lexicon.categories) {
    CompensatedSum sum;
    for (const auto& [key, value] : unigrams) {
      if (patterns.matches(key.text)) sum.add(value);
    }
    scores.emplace(name, sum.value());
  }
  return scores;
}

TopicScores score_topics(const FeatureVector& features, const TopicModel& model) {
  std::map<std::string, CompensatedSum, std::less<>> sums;
  for (const auto& [topic, _] : model.topics()) sums[topic];
  for (const auto& [key, value] : features.order_entries(1)) {
    for (const auto& [topic, weight] : model.word_topics(key.text)) sums[topic].add(value * weight);
  }
  TopicScores scores;
  for (const auto& [topic, sum] : sums) scores.emplace(topic, sum.value());
  return scores;
}

double apply_trait_model(const FeatureVector& features, const TopicScores& topic_scores, const TraitModel& model) {
  CompensatedSum sum;
  sum.add(model.intercept);
  for (const auto& [ref, weight] : model.weights) {
    double v = 0.0;
    if (ref.kind == FeatureRef::Kind::topic) {
      auto it = topic_scores.find(ref.topic_id);
      if (it != topic_scores.end()) v = it->second;
    } else {
      v = features.value(ref.ngram);
      if (ref.mode == FeatureMode::binary) v = v > 0.0 ? 1.0 : 0.0;
    }
    sum.add(weight * v);
  }
  return sum.value();
}

}  // namespace langtraj
