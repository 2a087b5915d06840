#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "langtraj/text_features.hpp"

namespace langtraj {

inline constexpr std::array<std::string_view, 4> kTraitNames = {"anxiety", "depression", "neuroticism",
                                                                 "extraversion"};
inline constexpr std::array<std::string_view, 3> kCategoryNames = {"first_person_singular",
                                                                    "first_person_plural", "articles"};

/// Patterns of one lexicon category: literal tokens, plus stems written
/// "abc*" in the source file that match any token starting with "abc".
struct CategoryPatterns {
  std::set<std::string, std::less<>> literals;
  std::set<std::string, std::less<>> stems;

  bool matches(std::string_view token) const;
};

struct CategoricalLexicon {
  std::map<std::string, CategoryPatterns, std::less<>> categories;

  void add(std::string_view category, std::string_view pattern);
};

/// Topic model given as p(topic | word).
class TopicModel {
 public:
  void add(const std::string& topic_id, const std::string& word, double weight);

  const std::map<std::string, std::map<std::string, double>>& topics() const { return topics_; }
  /// (topic, weight) pairs of one word, sorted by topic id; empty when unknown.
  std::span<const std::pair<std::string, double>> word_topics(std::string_view word) const;
  std::vector<std::string> vocabulary() const;

 private:
  std::map<std::string, std::map<std::string, double>> topics_;
  std::map<std::string, std::vector<std::pair<std::string, double>>, std::less<>> by_word_;
};

using TopicScores = std::map<std::string, double, std::less<>>;
using CategoryScores = std::map<std::string, double, std::less<>>;

/// Reference to one model input: a topic score ("topic:T17") or an n-gram
/// value ("1gram:nightmare", "2gram:i remember").
struct FeatureRef {
  enum class Kind { topic, ngram };
  Kind kind = Kind::topic;
  std::string topic_id;
  NGramKey ngram;
  FeatureMode mode = FeatureMode::relative_frequency;

  static FeatureRef parse(std::string_view text, FeatureMode mode = FeatureMode::relative_frequency);
  std::string str() const;
};

struct TraitModel {
  std::string trait_name;
  double intercept = 0.0;
  std::vector<std::pair<FeatureRef, double>> weights;
};

struct ModelBundle {
  std::map<std::string, TraitModel, std::less<>> traits;
  CategoricalLexicon lexicon;
  TopicModel topics;
  /// Content digest of the bundle files; empty for in-memory bundles.
  std::string id;
  /// Non-fatal findings from loading, e.g. topic completeness violations.
  std::vector<std::string> warnings;

  /// Throws SchemaError naming the first missing trait or category.
  void validate() const;
};

/// Header: term,category
CategoricalLexicon parse_lexicon(std::istream& in, std::string_view source = "lexicon");
/// Header: topic_id,word,weight
TopicModel parse_topic_model(std::istream& in, std::string_view source = "topics");
/// JSON: {"trait", "intercept", "weights": [{"feature", "weight", "mode"?}]}
TraitModel parse_trait_model(std::istream& in, std::string_view source = "trait");

void write_lexicon(std::ostream& out, const CategoricalLexicon& lexicon);
void write_topic_model(std::ostream& out, const TopicModel& model);
void write_trait_model(std::ostream& out, const TraitModel& model);

/// One message per word whose topic weights do not sum to 1 within `tolerance`.
std::vector<std::string> check_topic_completeness(const TopicModel& model, double tolerance = 1e-6);

/// Loads lexicon.csv, topics.csv and traits/*.json from a bundle directory.
ModelBundle load_bundle(const std::filesystem::path& dir, double completeness_tolerance = 1e-6);
void write_bundle(const std::filesystem::path& dir, const ModelBundle& bundle);

/// Sum of unigram relative frequencies matching each category.
CategoryScores score_categories(const FeatureVector& features, const CategoricalLexicon& lexicon);
/// Topic prevalence: sum over words of rel_freq(word) * p(topic | word).
TopicScores score_topics(const FeatureVector& features, const TopicModel& model);
/// intercept + sum of weight * value; unresolvable references read as 0.
double apply_trait_model(const FeatureVector& features, const TopicScores& topic_scores, const TraitModel& model);

}  // namespace langtraj
