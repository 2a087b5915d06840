#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langtraj/cohort.hpp"

namespace langtraj {

/// Lowercased word form without whitespace.
using Token = std::string;
/// Tokens of one utterance. N-grams never span two of these.
using TokenStream = std::vector<Token>;

inline constexpr int kMaxNGramOrder = 3;

/// A 1-, 2- or 3-gram. Terms are stored space-joined; tokens never contain
/// whitespace, so the join is unambiguous.
struct NGramKey {
  int order = 1;
  std::string text;

  static NGramKey from_terms(std::span<const Token> terms);
  std::vector<Token> terms() const;

  auto operator<=>(const NGramKey&) const = default;
};

enum class FeatureMode { relative_frequency, binary };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

/// Sparse n-gram features of one responder.
///
/// Entries are sorted by (order, text) so that iteration, and therefore any
/// accumulation over them, happens in a fixed order. In relative_frequency
/// mode the entries of each order sum to one; in binary mode every value is 1.
class FeatureVector {
 public:
  using Entry = std::pair<NGramKey, double>;

  FeatureVector() = default;
  FeatureVector(FeatureMode mode, std::vector<Entry> entries, std::array<std::uint64_t, kMaxNGramOrder> totals);

  FeatureMode mode() const { return mode_; }
  std::span<const Entry> entries() const { return entries_; }
  /// Entries of a single order; a contiguous slice of entries().
  std::span<const Entry> order_entries(int order) const;
  /// Total number of n-gram occurrences of the given order.
  std::uint64_t total(int order) const;

  /// 0 for keys that are not present.
  double value(const NGramKey& key) const;
  double value(int order, std::string_view text) const;

 private:
  FeatureMode mode_ = FeatureMode::relative_frequency;
  std::vector<Entry> entries_;
  std::array<std::uint64_t, kMaxNGramOrder> totals_{};
};

struct MetaFeatures {
  std::uint64_t word_count = 0;
  double avg_word_length = 0.0;  // characters (code points) per token
};

/// Casefolds and splits on whitespace. Inside a whitespace chunk any
/// punctuation other than apostrophe, hyphen and slash is a separator;
/// apostrophes, hyphens and slashes are kept internally and stripped at the
/// ends. Digits and non-ASCII letters are word characters.
std::vector<Token> tokenize(std::string_view text);

/// Tokens of every responder utterance, one stream per utterance.
std::vector<TokenStream> responder_tokens(const Transcript& transcript);

FeatureVector extract_ngrams(std::span<const TokenStream> utterances, int max_order, FeatureMode mode);
/// Single-utterance convenience overload.
FeatureVector extract_ngrams(std::span<const Token> tokens, int max_order, FeatureMode mode);

MetaFeatures meta_features(std::span<const TokenStream> utterances);
MetaFeatures meta_features(std::span<const Token> tokens);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

/// Rows: responder_id,order,ngram,value (header written when requested).
void write_feature_table(std::ostream& out, std::string_view responder_id, const FeatureVector& features,
                         bool with_header = true);

}  // namespace langtraj
