#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/lexica.hpp"

using namespace langtraj;

namespace {

FeatureVector unigrams(std::vector<Token> tokens) {
  return extract_ngrams(std::span<const Token>(tokens), 1, FeatureMode::relative_frequency);
}

}  // namespace

TEST_CASE("score_categories") {
  CategoricalLexicon lex;
  lex.add("fps", "i");
  lex.add("fpp", "we");
  auto s = score_categories(unigrams({"i", "i", "we"}), lex);
  CHECK(s["fps"] == doctest::Approx(2.0 / 3.0));
  CHECK(s["fpp"] == doctest::Approx(1.0 / 3.0));

  s = score_categories(unigrams({"storm"}), lex);
  CHECK(s["fps"] == 0.0);
  CHECK(s["fpp"] == 0.0);

  CategoricalLexicon stems;
  stems.add("c", "respond*");
  CHECK(score_categories(unigrams({"responders", "respond", "cat", "cat"}), stems)["c"] == doctest::Approx(0.5));
  CHECK_THROWS_AS(stems.add("c", "*"), SchemaError);
}

TEST_CASE("score_topics") {
  TopicModel one;
  one.add("T", "storm", 1.0);
  one.add("T", "calm", 1.0);
  CHECK(score_topics(unigrams({"storm", "calm", "calm"}), one)["T"] == doctest::Approx(1.0));

  TopicModel split;
  split.add("T1", "storm", 1.0);
  split.add("T2", "calm", 1.0);
  auto s = score_topics(unigrams({"storm", "calm"}), split);
  CHECK(s["T1"] == doctest::Approx(0.5));
  CHECK(s["T2"] == doctest::Approx(0.5));

  TopicModel soft;
  soft.add("T1", "storm", 0.8);
  soft.add("T1", "calm", 0.1);
  soft.add("T2", "storm", 0.2);
  soft.add("T2", "calm", 0.9);
  s = score_topics(unigrams({"storm", "storm", "storm", "calm", "calm"}), soft);
  CHECK(s["T1"] == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(s["T2"] == doctest::Approx(0.48).epsilon(1e-12));
}

TEST_CASE("scores are linear in the frequency vector") {
  // mixing two documents of equal length averages their scores
  TopicModel soft;
  soft.add("T1", "storm", 0.8);
  soft.add("T1", "calm", 0.1);
  const auto a = score_topics(unigrams({"storm", "calm", "calm", "x"}), soft)["T1"];
  const auto b = score_topics(unigrams({"storm", "storm", "storm", "calm"}), soft)["T1"];
  const auto ab = score_topics(unigrams({"storm", "calm", "calm", "x", "storm", "storm", "storm", "calm"}), soft)["T1"];
  CHECK(ab == doctest::Approx((a + b) / 2).epsilon(1e-14));
}

TEST_CASE("apply_trait_model") {
  TraitModel m;
  m.intercept = 2.5;
  const auto f = unigrams({"storm"});
  CHECK(apply_trait_model(f, {}, m) == 2.5);

  TraitModel t;
  t.weights.push_back({FeatureRef::parse("topic:T1"), 2.0});
  TopicScores ts{{"T1", 0.52}};
  CHECK(apply_trait_model(f, ts, t) == doctest::Approx(1.04));

  TraitModel oov;
  oov.intercept = 1.0;
  oov.weights.push_back({FeatureRef::parse("1gram:nightmare"), 5.0});
  oov.weights.push_back({FeatureRef::parse("topic:T9"), 5.0});
  CHECK(apply_trait_model(f, ts, oov) == 1.0);

  TraitModel gram;
  gram.weights.push_back({FeatureRef::parse("1gram:storm"), 3.0});
  CHECK(apply_trait_model(f, {}, gram) == 3.0);
}

TEST_CASE("FeatureRef parsing") {
  const auto r = FeatureRef::parse("2gram:i remember");
  CHECK(r.kind == FeatureRef::Kind::ngram);
  CHECK(r.ngram.order == 2);
  CHECK(r.str() == "2gram:i remember");
  CHECK_THROWS_AS(FeatureRef::parse("2gram:alone"), ParseError);
  CHECK_THROWS_AS(FeatureRef::parse("bogus"), ParseError);
}

TEST_CASE("load_bundle") {
  fixtures::TempDir dir("bundle");
  const auto bundle = fixtures::tiny_bundle();
  write_bundle(dir.path(), bundle);

  const auto loaded = load_bundle(dir.path());
  CHECK(loaded.traits.size() == 4);
  CHECK(loaded.lexicon.categories.size() == 3);
  CHECK(loaded.id.size() == 16);
  CHECK(loaded.warnings.empty());
  CHECK(load_bundle(dir.path()).id == loaded.id);

  SUBCASE("missing trait") {
    std::filesystem::remove(dir / "traits/extraversion.json");
    try {
      load_bundle(dir.path());
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()) == "missing trait: extraversion");
    }
  }
  SUBCASE("incomplete topic weights warn") {
    std::ofstream(dir / "topics.csv") << "topic_id,word,weight\nT1,we,0.7\nT2,we,0.4\n";
    const auto b = load_bundle(dir.path());
    REQUIRE(b.warnings.size() == 1);
    CHECK(b.warnings[0].find("'we'") != std::string::npos);
    CHECK(b.warnings[0].find("1.1") != std::string::npos);
  }
  SUBCASE("bad weight names the line") {
    std::ofstream(dir / "topics.csv") << "topic_id,word,weight\nT1,we,1\nT1,us,heavy\n";
    try {
      load_bundle(dir.path());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("topics.csv:3") != std::string::npos);
    }
  }
  SUBCASE("lexicon line order does not matter") {
    std::ofstream(dir / "lexicon.csv") << "term,category\nthe,articles\nwe,first_person_plural\ni,first_person_singular\nme,first_person_singular\n";
    const auto a = load_bundle(dir.path());
    std::ofstream(dir / "lexicon.csv") << "term,category\nme,first_person_singular\ni,first_person_singular\nwe,first_person_plural\nthe,articles\n";
    const auto b = load_bundle(dir.path());
    const auto f = unigrams({"me", "i", "we", "the", "cat"});
    CHECK(score_categories(f, a.lexicon) == score_categories(f, b.lexicon));
  }
}

TEST_CASE("missing category") {
  auto b = fixtures::tiny_bundle();
  b.lexicon.categories.erase("articles");
  try {
    b.validate();
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()) == "missing category: articles");
  }
}

TEST_CASE("topic scores of a complete model stay in [0, 1] and sum to at most 1") {
  std::mt19937_64 rng(11);
  TopicModel m;
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  for (const auto& w : words) {
    const double u = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    m.add("T1", w, u);
    m.add("T2", w, 1 - u);
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Token> doc(1 + rng() % 30);
    for (auto& t : doc) t = trial % 3 == 0 ? "zz" : words[rng() % words.size()];
    const auto s = score_topics(unigrams(doc), m);
    double total = 0;
    for (const auto& [k, v] : s) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      total += v;
    }
    CHECK(total <= 1.0 + 1e-6);
  }
}

TEST_CASE("shipped demo bundle loads without warnings") {
  const auto bundle = load_bundle(std::filesystem::path(LANGTRAJ_SOURCE_DIR) / "data/demo_bundle");
  CHECK(bundle.warnings.empty());
  CHECK(bundle.traits.size() == 4);
  const auto f = extract_ngrams(tokenize("I worry, I can't sleep, nightmares"), 1, FeatureMode::relative_frequency);
  CHECK(score_topics(f, bundle.topics).at("worry_sleep") == doctest::Approx((0.5 + 0.4 + 0.6) / 6));
}
