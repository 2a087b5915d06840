#pragma once

// Small builders shared by the unit and acceptance tests.

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "langtraj/cohort.hpp"
#include "langtraj/dates.hpp"
#include "langtraj/digest.hpp"
#include "langtraj/lexica.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("langtraj-" + tag + "-" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline langtraj::Date day(const char* iso) { return langtraj::parse_iso_date(iso); }

inline langtraj::Transcript transcript(const std::string& id, const char* date,
                                       std::vector<std::pair<langtraj::Speaker, std::string>> turns) {
  langtraj::Transcript t;
  t.responder_id = id;
  t.interview_date = day(date);
  double clock = 0.0;
  for (auto& [who, text] : turns) t.utterances.push_back({clock++, who, std::move(text)});
  return t;
}

inline langtraj::PclRecord pcl(const std::string& id, langtraj::Date date, double score) {
  return {id, date, score};
}

/// Bundle with fps={i}, fpp={we}, articles={the} and intercept-only traits.
inline langtraj::ModelBundle tiny_bundle(double trait_intercept = 1.5) {
  langtraj::ModelBundle b;
  b.lexicon.add("first_person_singular", "i");
  b.lexicon.add("first_person_plural", "we");
  b.lexicon.add("articles", "the");
  b.topics.add("T1", "we", 1.0);
  for (auto name : langtraj::kTraitNames) {
    langtraj::TraitModel m;
    m.trait_name = std::string(name);
    m.intercept = trait_intercept;
    b.traits[m.trait_name] = m;
  }
  return b;
}

/// Every regular file below `dir`, keyed by relative path, with its SHA-256.
inline std::vector<std::pair<std::string, std::string>> tree_digest(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).generic_string(), langtraj::sha256_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures
