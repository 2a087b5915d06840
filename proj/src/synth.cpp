#include "langtraj/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "langtraj/associations.hpp"
#include "langtraj/digest.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/numeric.hpp"
#include "langtraj/parallel.hpp"
#include "langtraj/stats.hpp"
#include "langtraj/text_features.hpp"

namespace langtraj {

namespace {

// Marker categories emitted with trait-shifted probabilities, in the order
// of their latent traits.
constexpr std::array<std::string_view, 7> kMarkers = {"first_person_singular", "first_person_plural", "articles",
                                                      "anxiety",  "depression", "neuroticism", "extraversion"};
constexpr std::array<std::string_view, 4> kTraitTopics = {"ANX", "DEP", "NEU", "EXT"};
constexpr double kFirstWordWeight = 0.5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::size_t index) : rng_(splitmix64(seed + splitmix64(index + 1))) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  /// Uniform integer in [lo, hi].
  long integer(long lo, long hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return lo + std::min(static_cast<long>(uniform() * span), hi - lo);
  }

 private:
  std::mt19937_64 rng_;
};

const std::vector<std::string>& words_of(std::string_view category) {
  return synth_vocabulary().find(category)->second;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Standardizes in-sample; constant columns become all zeros.
std::vector<double> standardize_or_zero(std::span<const double> v) {
  try {
    return standardize(v);
  } catch (const ConstantColumn&) {
    return std::vector<double>(v.size(), 0.0);
  }
}

double sample_variance(std::span<const double> v) {
  const double s = sample_sd(v);
  return s * s;
}

// Phase-one state of one subject: everything drawn from its own stream.
struct Draft {
  std::string id;
  std::array<double, kAssessmentCount> latent{};
  std::array<double, kAssessmentCount> features{};
  std::map<std::string, double, std::less<>> expected_rate;
  Transcript transcript;
  Demographics demo;
  double age = 0, female = 0, police = 0, years = 0;
  double e_baseline = 0, u_slope = 0;
  long pre_offset = 0;
  std::vector<long> post_days;
  std::vector<double> post_noise;
};

const std::array<std::string_view, 6> kInterviewerLines = {
    "Can you tell me about that day?", "What happened next?",      "How did you feel afterwards?",
    "Where were you working then?",    "Who was with you there?",  "How has it been since?"};

Draft draft_subject(const SynthConfig& c, std::size_t index) {
  Stream rng(c.seed, index);
  Draft d;
  d.id = fmt::format("S{:04d}", index + 1);
  for (auto& z : d.latent) z = rng.normal();

  // Demographics.
  d.age = std::round(std::clamp(c.age_mean + c.age_sd * rng.normal(), 18.0, 90.0) * 10.0) / 10.0;
  d.female = rng.uniform() < c.female_rate ? 1.0 : 0.0;
  d.police = rng.uniform() < c.police_rate ? 1.0 : 0.0;
  const double marital_u = rng.uniform();
  const double unknown_u = rng.uniform();
  const Date first_interview{std::chrono::year{2010}, std::chrono::month{1}, std::chrono::day{1}};
  const Date interview = add_days(first_interview, rng.integer(0, 9 * 365 - 1));
  d.years = years_since_911(interview);
  std::array<bool, 3> missing{};
  for (auto& m : missing) m = rng.uniform() < c.missing_rate;

  d.demo.responder_id = d.id;
  if (!missing[0]) d.demo.age_at_interview = d.age;
  if (!missing[1]) d.demo.gender = d.female > 0 ? Gender::female : Gender::male;
  if (!missing[2]) d.demo.occupation_police = d.police > 0;
  d.demo.marital_status = unknown_u < c.marital_unknown_rate ? MaritalStatus::unknown
                          : marital_u < c.married_rate      ? MaritalStatus::married
                                                            : MaritalStatus::not_married;
  d.demo.years_since_911 = d.years;

  // Emission probabilities.
  const auto latent_of = [&](std::string_view name) {
    return d.latent[static_cast<std::size_t>(*parse_assessment_name(name))];
  };
  std::array<double, kMarkers.size()> weight{};
  double marker_base = 0, z = 0;
  for (std::size_t m = 0; m < kMarkers.size(); ++m) {
    const double base = c.base_rates.find(kMarkers[m])->second;
    marker_base += base;
    weight[m] = base * std::exp(c.marker_link * latent_of(kMarkers[m]));
    z += weight[m];
  }
  const double filler = (1.0 - marker_base);
  z += filler;
  const double long_share =
      logistic(std::log(c.long_word_rate / (1.0 - c.long_word_rate)) + c.marker_link * latent_of("avg_word_length"));
  std::vector<std::pair<std::string_view, double>> cumulative;
  double acc = 0;
  for (std::size_t m = 0; m < kMarkers.size(); ++m) {
    d.expected_rate[std::string(kMarkers[m])] = weight[m] / z;
    acc += weight[m] / z;
    cumulative.emplace_back(kMarkers[m], acc);
  }
  acc += filler / z * long_share;
  cumulative.emplace_back("filler_long", acc);
  cumulative.emplace_back("filler_short", 2.0);  // absorbs rounding

  const double n_mean = c.words_per_subject * std::exp(-0.5 * c.word_count_log_sd * c.word_count_log_sd);
  const long n_words =
      std::max(20L, std::lround(n_mean * std::exp(c.word_count_log_sd * latent_of("word_count"))));

  // Tokens, with counts kept for the realized features.
  std::map<std::string_view, std::uint64_t> category_count;
  std::map<std::string_view, std::uint64_t> first_word_count;
  std::uint64_t char_total = 0;
  std::vector<std::string_view> tokens;
  tokens.reserve(static_cast<std::size_t>(n_words));
  for (long w = 0; w < n_words; ++w) {
    const double u = rng.uniform();
    auto it = std::find_if(cumulative.begin(), cumulative.end(), [&](const auto& p) { return u < p.second; });
    const auto& list = words_of(it->first);
    const auto k = static_cast<std::size_t>(rng.integer(0, static_cast<long>(list.size()) - 1));
    ++category_count[it->first];
    if (k == 0) ++first_word_count[it->first];
    char_total += list[k].size();
    tokens.push_back(list[k]);
  }

  const auto n = static_cast<double>(n_words);
  auto rate = [&](std::string_view cat) {
    auto it = category_count.find(cat);
    return it == category_count.end() ? 0.0 : static_cast<double>(it->second) / n;
  };
  auto first_rate = [&](std::string_view cat) {
    auto it = first_word_count.find(cat);
    return it == first_word_count.end() ? 0.0 : static_cast<double>(it->second) / n;
  };
  auto set_feature = [&](Assessment a, double v) { d.features[static_cast<std::size_t>(a)] = v; };
  set_feature(Assessment::anxiety, rate("anxiety") + kFirstWordWeight * first_rate("anxiety"));
  set_feature(Assessment::depression, rate("depression") + kFirstWordWeight * first_rate("depression"));
  set_feature(Assessment::neuroticism, rate("neuroticism") + kFirstWordWeight * first_rate("neuroticism"));
  set_feature(Assessment::extraversion, rate("extraversion") + kFirstWordWeight * first_rate("extraversion"));
  set_feature(Assessment::first_person_singular, rate("first_person_singular"));
  set_feature(Assessment::first_person_plural, rate("first_person_plural"));
  set_feature(Assessment::articles, rate("articles"));
  set_feature(Assessment::avg_word_length, static_cast<double>(char_total) / n);
  set_feature(Assessment::word_count, n);

  // Utterances: sentences of 5-40 words, occasional interviewer prompts.
  d.transcript.responder_id = d.id;
  d.transcript.interview_date = interview;
  double clock = 0;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    if (rng.uniform() < c.interviewer_turn_rate) {
      const auto& line = kInterviewerLines[static_cast<std::size_t>(rng.integer(0, kInterviewerLines.size() - 1))];
      d.transcript.utterances.push_back({clock, Speaker::interviewer, std::string(line)});
      clock += 3.0;
    }
    const auto len = std::min<std::size_t>(static_cast<std::size_t>(rng.integer(5, 40)), tokens.size() - pos);
    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
      std::string word(tokens[pos + k]);
      if (k == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      if (k) text += ' ';
      text += word;
      if (k + 1 < len && rng.uniform() < 0.08) text += ',';
    }
    text += '.';
    d.transcript.utterances.push_back({clock, Speaker::responder, std::move(text)});
    clock += 0.4 * static_cast<double>(len) + 1.0;
    pos += len;
  }

  // Outcome noise and visit schedule.
  d.e_baseline = rng.normal();
  d.u_slope = rng.normal();
  d.pre_offset = rng.integer(7, 90);
  const int posts = c.visits_per_subject - 1;
  long previous = 0;
  for (int k = 1; k <= posts; ++k) {
    const long nominal = std::lround(kDaysPerYear * c.follow_up_years * k / posts);
    const long day = std::max(previous + 1, nominal + rng.integer(-c.visit_jitter_days, c.visit_jitter_days));
    d.post_days.push_back(day);
    previous = day;
  }
  for (int k = 0; k < posts; ++k) d.post_noise.push_back(rng.normal());
  return d;
}

/// Maps a standardized latent to PCL with exactly the target sample mean and
/// SD: y = min(85, 17 + exp(mu + sigma * z)), mu and sigma by nested bisection.
std::vector<double> moment_matched_pcl(std::span<const double> z, double target_mean, double target_sd) {
  auto values = [&](double mu, double sigma) {
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = std::min(kPclMax, kPclMin + std::exp(mu + sigma * z[i]));
    return y;
  };
  auto solve_mu = [&](double sigma) {
    double lo = -50, hi = std::log(kPclMax - kPclMin) + 50 * sigma + 50;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean(values(mid, sigma)) < target_mean ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto sd_at = [&](double sigma) { return sample_sd(values(solve_mu(sigma), sigma)); };
  double lo = 1e-6, hi = 8.0;
  if (!(sd_at(lo) < target_sd && sd_at(hi) > target_sd)) {
    throw ConfigError(fmt::format("baseline PCL mean {} / SD {} cannot be reached inside [17, 85]", target_mean,
                                  target_sd));
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sd_at(mid) < target_sd ? lo : hi) = mid;
  }
  const double sigma = 0.5 * (lo + hi);
  return values(solve_mu(sigma), sigma);
}

void check_finite(std::string_view what, double v) {
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
}

void check_rate(std::string_view what, double v, bool open_at_zero = false) {
  if (!(v >= 0.0 && v <= 1.0) || (open_at_zero && v == 0.0)) {
    throw ConfigError(fmt::format("{} = {} is not a valid rate", what, v));
  }
}

void effects_from_json(const nlohmann::json& j, std::map<std::string, PlantedEffect, std::less<>>& out,
                       std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object");
  out.clear();
  for (const auto& [name, value] : j.items()) {
    PlantedEffect e;
    for (const auto& [key, v] : value.items()) {
      if (key == "cross_sectional") {
        e.cross_sectional = v.get<double>();
      } else if (key == "longitudinal") {
        e.longitudinal = v.get<double>();
      } else {
        throw ConfigError(fmt::format("{}.{}: unknown key '{}'", what, name, key));
      }
    }
    out[name] = e;
  }
}

nlohmann::ordered_json effects_to_json(const std::map<std::string, PlantedEffect, std::less<>>& effects) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [name, e] : effects) {
    j[name] = {{"cross_sectional", e.cross_sectional}, {"longitudinal", e.longitudinal}};
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

SynthConfig::SynthConfig() {
  feature_effects["anxiety"] = {0.26, 0.31};
  feature_effects["first_person_plural"] = {0.0, -0.37};
  baseline_on_slope = -0.3;
  base_rates = {{"first_person_singular", 0.04}, {"first_person_plural", 0.01}, {"articles", 0.06},
                {"anxiety", 0.01},               {"depression", 0.01},          {"neuroticism", 0.01},
                {"extraversion", 0.01}};
}

void SynthConfig::validate() const {
  if (n_subjects < 6) throw ConfigError("n_subjects must be at least 6");
  if (visits_per_subject < 4) throw ConfigError("visits_per_subject must be at least 4 (1 pre + 3 post)");
  check_finite("words_per_subject", words_per_subject);
  if (words_per_subject < 20) throw ConfigError("words_per_subject must be at least 20");
  if (!(word_count_log_sd >= 0) || !std::isfinite(word_count_log_sd)) {
    throw ConfigError("word_count_log_sd must be finite and non-negative");
  }
  if (visit_jitter_days < 0) throw ConfigError("visit_jitter_days must be non-negative");
  const double spacing = kDaysPerYear * follow_up_years / (visits_per_subject - 1);
  if (!(spacing - visit_jitter_days > 90)) {
    throw ConfigError("first post-interview visit may fall within 90 days of the interview");
  }
  if (!(kDaysPerYear * follow_up_years - visit_jitter_days >= static_cast<double>(kTwoYearsDays))) {
    throw ConfigError("follow_up_years too short: the last visit must be at least 730 days after the interview");
  }
  for (auto [name, v] : {std::pair{"baseline_mean", baseline_mean}, {"baseline_sd", baseline_sd},
                         {"slope_mean", slope_mean}, {"slope_sd", slope_sd}, {"pcl_noise_sd", pcl_noise_sd},
                         {"baseline_on_slope", baseline_on_slope}, {"marker_link", marker_link},
                         {"age_mean", age_mean}, {"age_sd", age_sd}}) {
    check_finite(name, v);
  }
  if (!(baseline_mean > kPclMin && baseline_mean < kPclMax)) throw ConfigError("baseline_mean must lie in (17, 85)");
  if (!(baseline_sd > 0)) throw ConfigError("baseline_sd must be positive");
  if (!(slope_sd > 0)) throw ConfigError("slope_sd must be positive");
  if (pcl_noise_sd < 0) throw ConfigError("pcl_noise_sd must be non-negative");
  for (const auto& [name, e] : feature_effects) {
    if (!parse_assessment_name(name)) throw ConfigError("feature_effects: unknown feature '" + name + "'");
    check_finite("feature effect " + name, e.cross_sectional);
    check_finite("feature effect " + name, e.longitudinal);
  }
  const auto covs = concurrent_covariates();
  for (const auto& [name, e] : covariate_effects) {
    if (std::find(covs.begin(), covs.end(), name) == covs.end()) {
      throw ConfigError("covariate_effects: unknown covariate '" + name + "'");
    }
    check_finite("covariate effect " + name, e.cross_sectional);
    check_finite("covariate effect " + name, e.longitudinal);
  }
  double total = 0;
  for (auto m : kMarkers) {
    auto it = base_rates.find(m);
    if (it == base_rates.end()) throw ConfigError("base_rates: missing '" + std::string(m) + "'");
    check_rate("base rate " + std::string(m), it->second, true);
    total += it->second;
  }
  for (const auto& [name, _] : base_rates) {
    if (std::find(kMarkers.begin(), kMarkers.end(), name) == kMarkers.end()) {
      throw ConfigError("base_rates: unknown category '" + name + "'");
    }
  }
  if (!(total < 1.0)) throw ConfigError(fmt::format("marker base rates sum to {} (must stay below 1)", total));
  if (!(long_word_rate > 0 && long_word_rate < 1)) throw ConfigError("long_word_rate must lie in (0, 1)");
  check_rate("interviewer_turn_rate", interviewer_turn_rate);
  check_rate("female_rate", female_rate);
  check_rate("police_rate", police_rate);
  check_rate("married_rate", married_rate);
  check_rate("marital_unknown_rate", marital_unknown_rate);
  check_rate("missing_rate", missing_rate);
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synthetic cohort config must be a JSON object");
  SynthConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "n_subjects") c.n_subjects = v.get<int>();
      else if (key == "words_per_subject") c.words_per_subject = v.get<double>();
      else if (key == "word_count_log_sd") c.word_count_log_sd = v.get<double>();
      else if (key == "visits_per_subject") c.visits_per_subject = v.get<int>();
      else if (key == "follow_up_years") c.follow_up_years = v.get<double>();
      else if (key == "visit_jitter_days") c.visit_jitter_days = v.get<int>();
      else if (key == "baseline_mean") c.baseline_mean = v.get<double>();
      else if (key == "baseline_sd") c.baseline_sd = v.get<double>();
      else if (key == "slope_mean") c.slope_mean = v.get<double>();
      else if (key == "slope_sd") c.slope_sd = v.get<double>();
      else if (key == "pcl_noise_sd") c.pcl_noise_sd = v.get<double>();
      else if (key == "feature_effects") effects_from_json(v, c.feature_effects, key);
      else if (key == "covariate_effects") effects_from_json(v, c.covariate_effects, key);
      else if (key == "baseline_on_slope") c.baseline_on_slope = v.get<double>();
      else if (key == "marker_link") c.marker_link = v.get<double>();
      else if (key == "base_rates") {
        for (const auto& [m, r] : v.items()) c.base_rates[m] = r.get<double>();
      }
      else if (key == "long_word_rate") c.long_word_rate = v.get<double>();
      else if (key == "interviewer_turn_rate") c.interviewer_turn_rate = v.get<double>();
      else if (key == "age_mean") c.age_mean = v.get<double>();
      else if (key == "age_sd") c.age_sd = v.get<double>();
      else if (key == "female_rate") c.female_rate = v.get<double>();
      else if (key == "police_rate") c.police_rate = v.get<double>();
      else if (key == "married_rate") c.married_rate = v.get<double>();
      else if (key == "marital_unknown_rate") c.marital_unknown_rate = v.get<double>();
      else if (key == "missing_rate") c.missing_rate = v.get<double>();
      else if (key == "exact_residuals") c.exact_residuals = v.get<bool>();
      else throw ConfigError("unknown synthetic cohort config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic cohort config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n_subjects"] = n_subjects;
  j["words_per_subject"] = words_per_subject;
  j["word_count_log_sd"] = word_count_log_sd;
  j["visits_per_subject"] = visits_per_subject;
  j["follow_up_years"] = follow_up_years;
  j["visit_jitter_days"] = visit_jitter_days;
  j["baseline_mean"] = baseline_mean;
  j["baseline_sd"] = baseline_sd;
  j["slope_mean"] = slope_mean;
  j["slope_sd"] = slope_sd;
  j["pcl_noise_sd"] = pcl_noise_sd;
  j["feature_effects"] = effects_to_json(feature_effects);
  j["covariate_effects"] = effects_to_json(covariate_effects);
  j["baseline_on_slope"] = baseline_on_slope;
  j["marker_link"] = marker_link;
  j["base_rates"] = nlohmann::ordered_json::object();
  for (const auto& [m, r] : base_rates) j["base_rates"][m] = r;
  j["long_word_rate"] = long_word_rate;
  j["interviewer_turn_rate"] = interviewer_turn_rate;
  j["age_mean"] = age_mean;
  j["age_sd"] = age_sd;
  j["female_rate"] = female_rate;
  j["police_rate"] = police_rate;
  j["married_rate"] = married_rate;
  j["marital_unknown_rate"] = marital_unknown_rate;
  j["missing_rate"] = missing_rate;
  j["exact_residuals"] = exact_residuals;
  return j;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return SynthConfig::from_json(j);
}

nlohmann::ordered_json GroundTruth::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["feature_effects"] = effects_to_json(feature_effects);
  j["baseline_on_slope"] = baseline_on_slope;
  j["post_records"] = post_records;
  j["clipped_records"] = clipped_records;
  auto subs = nlohmann::ordered_json::array();
  for (const auto& s : subjects) {
    nlohmann::ordered_json o;
    o["responder_id"] = s.responder_id;
    o["baseline_pcl"] = s.baseline_pcl;
    o["slope"] = s.slope;
    o["features"] = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < kAssessmentCount; ++k) o["features"][std::string(kAssessmentNames[k])] = s.features[k];
    o["latent"] = s.latent;
    o["expected_rate"] = s.expected_rate;
    subs.push_back(std::move(o));
  }
  j["subjects"] = std::move(subs);
  return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth t;
  try {
    t.seed = j.at("seed").get<std::uint64_t>();
    effects_from_json(j.at("feature_effects"), t.feature_effects, "feature_effects");
    t.baseline_on_slope = j.at("baseline_on_slope").get<double>();
    t.post_records = j.at("post_records").get<std::size_t>();
    t.clipped_records = j.at("clipped_records").get<std::size_t>();
    for (const auto& o : j.at("subjects")) {
      SubjectTruth s;
      s.responder_id = o.at("responder_id").get<std::string>();
      s.baseline_pcl = o.at("baseline_pcl").get<double>();
      s.slope = o.at("slope").get<double>();
      for (std::size_t k = 0; k < kAssessmentCount; ++k) {
        s.features[k] = o.at("features").at(std::string(kAssessmentNames[k])).get<double>();
      }
      for (const auto& [k, v] : o.at("latent").items()) s.latent[k] = v.get<double>();
      for (const auto& [k, v] : o.at("expected_rate").items()) s.expected_rate[k] = v.get<double>();
      t.subjects.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("ground truth: ") + e.what());
  }
  return t;
}

// Trait marker words are kept near the corpus mean word length (~4 characters):
// a marker set of long words would share its sampling noise with
// avg_word_length and correlate the two features at low word counts.
const std::map<std::string, std::vector<std::string>, std::less<>>& synth_vocabulary() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> vocab = {
      {"first_person_singular", {"i", "me", "my", "mine", "myself"}},
      {"first_person_plural", {"we", "us", "our", "ours", "ourselves"}},
      {"articles", {"a", "an", "the"}},
      {"anxiety", {"fear", "panic", "edgy", "tense", "fret", "dread"}},
      {"depression", {"sad", "empty", "tired", "hopeless", "lonely", "cry"}},
      {"neuroticism", {"upset", "angry", "moody", "stressed", "irritable", "annoyed"}},
      {"extraversion", {"party", "friends", "fun", "talk", "laugh", "together"}},
      {"filler_short", {"was", "it", "and", "to", "of", "in", "that", "so", "go", "do",
                        "at", "on", "he", "she", "they", "you", "is", "up", "out", "day"}},
      {"filler_long", {"building", "remember", "downtown", "everything", "somebody", "firefighters", "afterwards",
                       "equipment", "ambulance", "department", "situation", "buildings", "hospital", "somewhere",
                       "understand"}},
  };
  return vocab;
}

ModelBundle synth_bundle() {
  ModelBundle b;
  for (std::size_t k = 0; k < 3; ++k) {
    for (const auto& w : words_of(kMarkers[k])) b.lexicon.add(kMarkers[k], w);
  }
  for (std::size_t k = 0; k < kTraitTopics.size(); ++k) {
    for (const auto& w : words_of(kMarkers[3 + k])) b.topics.add(std::string(kTraitTopics[k]), w, 1.0);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    for (const auto& w : words_of(kMarkers[k])) b.topics.add("PRON", w, 1.0);
  }
  for (const auto& w : words_of("filler_short")) b.topics.add("FILLER_S", w, 1.0);
  for (const auto& w : words_of("filler_long")) b.topics.add("FILLER_L", w, 1.0);
  for (std::size_t k = 0; k < kTraitTopics.size(); ++k) {
    TraitModel m;
    m.trait_name = std::string(kMarkers[3 + k]);
    m.weights.emplace_back(FeatureRef::parse("topic:" + std::string(kTraitTopics[k])), 1.0);
    m.weights.emplace_back(FeatureRef::parse("1gram:" + words_of(kMarkers[3 + k]).front()), kFirstWordWeight);
    b.traits.emplace(m.trait_name, std::move(m));
  }
  b.validate();
  return b;
}

SyntheticCohort generate_cohort(const SynthConfig& c, unsigned jobs) {
  c.validate();
  const auto n = static_cast<std::size_t>(c.n_subjects);
  std::vector<Draft> drafts(n);
  parallel_for(n, jobs, [&](std::size_t i) { drafts[i] = draft_subject(c, i); });

  // Standardized realized features and covariates.
  std::array<std::vector<double>, kAssessmentCount> x;
  for (std::size_t k = 0; k < kAssessmentCount; ++k) {
    std::vector<double> col;
    for (const auto& d : drafts) col.push_back(d.features[k]);
    x[k] = standardize_or_zero(col);
    const auto name = std::string(kAssessmentNames[k]);
    auto e = c.feature_effects.find(name);
    const bool constant = std::all_of(x[k].begin(), x[k].end(), [](double v) { return v == 0.0; });
    if (constant && e != c.feature_effects.end() && (e->second.cross_sectional != 0 || e->second.longitudinal != 0)) {
      throw ConfigError("feature '" + name + "' is constant in this cohort but carries a planted effect");
    }
  }
  const auto cov_names = concurrent_covariates();
  std::map<std::string, std::vector<double>, std::less<>> cov;
  for (const auto& name : cov_names) {
    std::vector<double> col;
    for (const auto& d : drafts) {
      col.push_back(name == kAgeColumn      ? d.age
                    : name == kGenderColumn ? d.female
                    : name == kOccupationColumn ? d.police
                                                : d.years);
    }
    cov[name] = standardize_or_zero(col);
  }
  auto effect = [&](const auto& map, std::string_view name) {
    auto it = map.find(name);
    return it == map.end() ? PlantedEffect{} : it->second;
  };

  // Baseline PCL.
  std::vector<double> b_sys(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum s;
    for (std::size_t k = 0; k < kAssessmentCount; ++k) {
      s.add(effect(c.feature_effects, kAssessmentNames[k]).cross_sectional * x[k][i]);
    }
    for (const auto& name : cov_names) s.add(effect(c.covariate_effects, name).cross_sectional * cov[name][i]);
    b_sys[i] = s.value();
  }
  const double var_b = sample_variance(b_sys);
  if (var_b > 1.0) throw ConfigError(fmt::format("cross-sectional effects explain {} > 1 of baseline variance", var_b));
  std::vector<double> b_latent(n);
  for (std::size_t i = 0; i < n; ++i) b_latent[i] = b_sys[i] + std::sqrt(1.0 - var_b) * drafts[i].e_baseline;
  const auto baseline = moment_matched_pcl(standardize(b_latent), c.baseline_mean, c.baseline_sd);
  const auto b_std = standardize_or_zero(baseline);

  // Slopes.
  std::vector<double> s_sys(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum s;
    for (std::size_t k = 0; k < kAssessmentCount; ++k) {
      s.add(effect(c.feature_effects, kAssessmentNames[k]).longitudinal * x[k][i]);
    }
    s.add(c.baseline_on_slope * b_std[i]);
    for (const auto& name : cov_names) s.add(effect(c.covariate_effects, name).longitudinal * cov[name][i]);
    s_sys[i] = s.value();
  }
  const int posts = c.visits_per_subject - 1;
  std::vector<double> grid;
  for (int k = 1; k <= posts; ++k) grid.push_back(c.follow_up_years * k / posts);
  const double grid_mean = mean(grid);
  double s_tt = 0;
  for (double t : grid) s_tt += (t - grid_mean) * (t - grid_mean);
  const double v_meas = c.pcl_noise_sd * c.pcl_noise_sd / (s_tt * c.slope_sd * c.slope_sd);
  const double var_u = 1.0 - sample_variance(s_sys) - v_meas;
  if (var_u < 0) {
    throw ConfigError(fmt::format("planted slope effects plus slope-estimation noise exceed unit variance ({:.3f})",
                                  1.0 - var_u));
  }
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = drafts[i].u_slope;
  if (c.exact_residuals) {
    std::vector<const std::vector<double>*> cols;
    for (const auto& col : x) cols.push_back(&col);
    cols.push_back(&b_std);
    for (const auto& name : cov_names) cols.push_back(&cov[name]);
    std::erase_if(cols, [](const auto* col) { return std::all_of(col->begin(), col->end(), [](double v) { return v == 0.0; }); });
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size() + 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      X(r, 0) = 1.0;
      for (std::size_t j = 0; j < cols.size(); ++j) X(r, static_cast<Eigen::Index>(j + 1)) = (*cols[j])[i];
      y[r] = u[i];
    }
    const Eigen::VectorXd resid = y - X * X.colPivHouseholderQr().solve(y);
    std::vector<double> res(resid.data(), resid.data() + resid.size());
    const double sd = sample_sd(res);
    for (std::size_t i = 0; i < n; ++i) u[i] = sd > 0 ? res[i] / sd * std::sqrt(var_u) : 0.0;
  } else {
    for (auto& v : u) v *= std::sqrt(var_u);
  }

  SyntheticCohort out;
  out.bundle = synth_bundle();
  out.truth.seed = c.seed;
  out.truth.baseline_on_slope = c.baseline_on_slope;
  for (auto name : kAssessmentNames) out.truth.feature_effects[std::string(name)] = effect(c.feature_effects, name);
  for (std::size_t i = 0; i < n; ++i) {
    auto& d = drafts[i];
    const double slope = c.slope_mean + c.slope_sd * (s_sys[i] + u[i]);
    const Date interview = d.transcript.interview_date;
    out.pcl.push_back({d.id, add_days(interview, -d.pre_offset), baseline[i]});
    for (std::size_t k = 0; k < d.post_days.size(); ++k) {
      const double t = static_cast<double>(d.post_days[k]) / kDaysPerYear;
      const double raw = baseline[i] + slope * t + c.pcl_noise_sd * d.post_noise[k];
      const double clipped = std::clamp(raw, kPclMin, kPclMax);
      ++out.truth.post_records;
      if (clipped != raw) ++out.truth.clipped_records;
      out.pcl.push_back({d.id, add_days(interview, d.post_days[k]), clipped});
    }
    SubjectTruth s;
    s.responder_id = d.id;
    s.baseline_pcl = baseline[i];
    s.slope = slope;
    s.features = d.features;
    for (std::size_t k = 0; k < kAssessmentCount; ++k) s.latent[std::string(kAssessmentNames[k])] = d.latent[k];
    s.expected_rate = std::move(d.expected_rate);
    out.truth.subjects.push_back(std::move(s));
    out.demographics.push_back(std::move(d.demo));
    out.transcripts.push_back(std::move(d.transcript));
  }
  return out;
}

void write_cohort(const std::filesystem::path& dir, const SyntheticCohort& cohort, const SynthConfig& config) {
  std::filesystem::create_directories(dir);
  std::ostringstream transcripts, pcl, demo;
  write_transcripts(transcripts, cohort.transcripts);
  write_pcl_records(pcl, cohort.pcl);
  write_demographics(demo, cohort.demographics);
  write_text(dir / "transcripts.jsonl", transcripts.str());
  write_text(dir / "pcl.csv", pcl.str());
  write_text(dir / "demographics.csv", demo.str());
  write_bundle(dir / "bundle", cohort.bundle);
  write_text(dir / "config.json", config.to_json().dump(2) + "\n");
  write_text(dir / "ground_truth.json", cohort.truth.to_json().dump(2) + "\n");
}

nlohmann::ordered_json OracleReport::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["coverage_rate"] = coverage_rate;
  j["max_abs_error"] = max_abs_error;
  auto rs = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    rs.push_back({{"feature", r.feature_name},
                  {"truth", r.truth},
                  {"estimate", r.estimate},
                  {"ci", {r.ci.lo, r.ci.hi}},
                  {"covered", r.covered},
                  {"significant", r.significant},
                  {"abs_error", r.abs_error}});
  }
  j["rows"] = std::move(rs);
  return j;
}

OracleReport oracle_report(const GroundTruth& truth, const AssociationResults& results) {
  auto seed = std::find_if(results.manifest.begin(), results.manifest.end(),
                           [](const auto& kv) { return kv.first == "seed"; });
  if (seed == results.manifest.end()) throw ProvenanceError("results carry no seed in their manifest");
  if (seed->second != std::to_string(truth.seed)) {
    throw ProvenanceError(fmt::format("results were produced with seed {} but the ground truth has seed {}",
                                      seed->second, truth.seed));
  }
  OracleReport report;
  report.seed = truth.seed;
  std::size_t covered = 0;
  for (auto name : kAssessmentNames) {
    auto it = std::find_if(results.results.begin(), results.results.end(),
                           [&](const AssociationResult& r) { return r.feature_name == name; });
    if (it == results.results.end()) throw SchemaError("results have no row for " + std::string(name));
    auto e = truth.feature_effects.find(name);
    OracleRow row;
    row.feature_name = std::string(name);
    row.truth = e == truth.feature_effects.end() ? 0.0 : e->second.longitudinal;
    row.estimate = it->beta.value;
    row.ci = it->beta.ci;
    row.covered = row.ci.lo <= row.truth && row.truth <= row.ci.hi;
    row.significant = it->beta.significant;
    row.abs_error = std::abs(row.estimate - row.truth);
    covered += row.covered ? 1 : 0;
    report.max_abs_error = std::max(report.max_abs_error, row.abs_error);
    report.rows.push_back(std::move(row));
  }
  report.coverage_rate = static_cast<double>(covered) / static_cast<double>(report.rows.size());
  return report;
}

}  // namespace langtraj
