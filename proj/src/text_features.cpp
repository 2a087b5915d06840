#include "langtraj/text_features.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "langtraj/csv.hpp"
#include "langtraj/errors.hpp"

namespace langtraj {

namespace {

constexpr char32_t kInvalid = 0xFFFD;

char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kInvalid;
  }
  if (i + len > s.size()) {
    ++i;
    return kInvalid;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

char32_t normalize_mark(char32_t cp) {
  switch (cp) {
    case 0x2018: case 0x2019: case 0x02BC: return '\'';
    case 0x2010: case 0x2011: return '-';
    case 0x2044: return '/';
    default: return cp;
  }
}

bool is_keeper(char32_t cp) { return cp == '\'' || cp == '-' || cp == '/'; }

bool is_separator(char32_t cp) {
  if (cp < 0x80) {
    const bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    return !alnum && !is_keeper(cp);
  }
  if (cp <= 0xBF) return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2012 && cp <= 0x2BFF) return true;  // dashes, general punctuation, symbols
  if (cp >= 0x3001 && cp <= 0x303F) return true;
  if (cp >= 0xFE30 && cp <= 0xFE6F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0x1F000) return true;  // emoji and pictographs
  return cp == kInvalid;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    return cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

void flush_piece(std::string& piece, std::vector<Token>& out) {
  std::size_t begin = 0;
  std::size_t end = piece.size();
  // Keepers are ASCII, so byte-wise trimming is safe.
  while (begin < end && is_keeper(static_cast<unsigned char>(piece[begin]))) ++begin;
  while (end > begin && is_keeper(static_cast<unsigned char>(piece[end - 1]))) --end;
  if (end > begin) out.emplace_back(piece, begin, end - begin);
  piece.clear();
}

bool key_less(const FeatureVector::Entry& e, int order, std::string_view text) {
  if (e.first.order != order) return e.first.order < order;
  return std::string_view(e.first.text) < text;
}

}  // namespace

NGramKey NGramKey::from_terms(std::span<const Token> terms) {
  NGramKey key;
  key.order = static_cast<int>(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) key.text.push_back(' ');
    key.text += terms[i];
  }
  return key;
}

std::vector<Token> NGramKey::terms() const {
  std::vector<Token> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(' ', start);
    if (pos == std::string::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::binary ? "binary" : "relative_frequency";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "binary") return FeatureMode::binary;
  if (text == "relative_frequency") return FeatureMode::relative_frequency;
  throw ParseError("unknown feature mode '" + std::string(text) + "'");
}

FeatureVector::FeatureVector(FeatureMode mode, std::vector<Entry> entries,
                             std::array<std::uint64_t, kMaxNGramOrder> totals)
    : mode_(mode), entries_(std::move(entries)), totals_(totals) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
}

std::span<const FeatureVector::Entry> FeatureVector::order_entries(int order) const {
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), order,
                             [](const Entry& e, int o) { return e.first.order < o; });
  auto hi = std::lower_bound(lo, entries_.end(), order + 1,
                             [](const Entry& e, int o) { return e.first.order < o; });
  return {lo, hi};
}

std::uint64_t FeatureVector::total(int order) const {
  if (order < 1 || order > kMaxNGramOrder) return 0;
  return totals_[static_cast<std::size_t>(order - 1)];
}

double FeatureVector::value(int order, std::string_view text) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), 0,
                             [&](const Entry& e, int) { return key_less(e, order, text); });
  if (it != entries_.end() && it->first.order == order && it->first.text == text) return it->second;
  return 0.0;
}

double FeatureVector::value(const NGramKey& key) const { return value(key.order, key.text); }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string piece;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = normalize_mark(decode_utf8(text, i));
    if (is_space(cp) || is_separator(cp)) {
      flush_piece(piece, out);
    } else {
      encode_utf8(to_lower(cp), piece);
    }
  }
  flush_piece(piece, out);
  return out;
}

std::vector<TokenStream> responder_tokens(const Transcript& transcript) {
  std::vector<TokenStream> out;
  for (const auto& u : transcript.utterances) {
    if (u.speaker != Speaker::responder) continue;
    auto tokens = tokenize(u.text);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

FeatureVector extract_ngrams(std::span<const TokenStream> utterances, int max_order, FeatureMode mode) {
  if (max_order < 1 || max_order > kMaxNGramOrder) {
    throw DomainError("n-gram order must be in [1, 3], got " + std::to_string(max_order));
  }
  std::array<std::unordered_map<std::string, std::uint64_t>, kMaxNGramOrder> counts;
  std::array<std::uint64_t, kMaxNGramOrder> totals{};
  std::string key;
  for (const auto& tokens : utterances) {
    for (int n = 1; n <= max_order; ++n) {
      if (tokens.size() < static_cast<std::size_t>(n)) break;
      auto& table = counts[static_cast<std::size_t>(n - 1)];
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        key.clear();
        for (int k = 0; k < n; ++k) {
          if (k) key.push_back(' ');
          key += tokens[i + static_cast<std::size_t>(k)];
        }
        ++table[key];
        ++totals[static_cast<std::size_t>(n - 1)];
      }
    }
  }

  std::vector<FeatureVector::Entry> entries;
  std::size_t distinct = 0;
  for (const auto& c : counts) distinct += c.size();
  entries.reserve(distinct);
  for (int n = 1; n <= max_order; ++n) {
    const auto total = static_cast<double>(totals[static_cast<std::size_t>(n - 1)]);
    for (auto& [text, count] : counts[static_cast<std::size_t>(n - 1)]) {
      const double v = mode == FeatureMode::binary ? 1.0 : static_cast<double>(count) / total;
      entries.emplace_back(NGramKey{n, text}, v);
    }
  }
  return FeatureVector(mode, std::move(entries), totals);
}

FeatureVector extract_ngrams(std::span<const Token> tokens, int max_order, FeatureMode mode) {
  const std::vector<TokenStream> one{TokenStream(tokens.begin(), tokens.end())};
  return extract_ngrams(one, max_order, mode);
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

MetaFeatures meta_features(std::span<const TokenStream> utterances) {
  MetaFeatures m;
  std::uint64_t chars = 0;
  for (const auto& tokens : utterances) {
    for (const auto& t : tokens) {
      ++m.word_count;
      chars += utf8_length(t);
    }
  }
  m.avg_word_length = m.word_count ? static_cast<double>(chars) / static_cast<double>(m.word_count) : 0.0;
  return m;
}

MetaFeatures meta_features(std::span<const Token> tokens) {
  const std::vector<TokenStream> one{TokenStream(tokens.begin(), tokens.end())};
  return meta_features(one);
}

void write_feature_table(std::ostream& out, std::string_view responder_id, const FeatureVector& features,
                         bool with_header) {
  if (with_header) csv::write_row(out, {"responder_id", "order", "ngram", "value"});
  for (const auto& [key, value] : features.entries()) {
    csv::write_row(out, {std::string(responder_id), std::to_string(key.order), key.text, csv::format_double(value)});
  }
}

}  // namespace langtraj
