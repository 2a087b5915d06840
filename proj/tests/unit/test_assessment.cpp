#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "langtraj/assessment.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/synth.hpp"

using namespace langtraj;

TEST_CASE("assess_responder: i i we") {
  const auto bundle = fixtures::tiny_bundle(1.5);
  const auto t = fixtures::transcript("r", "2012-01-01", {{Speaker::interviewer, "the the the"}, {Speaker::responder, "i i we"}});
  const auto rec = assess_responder(t, bundle);
  CHECK(rec[Assessment::first_person_singular] == doctest::Approx(2.0 / 3.0));
  CHECK(rec[Assessment::first_person_plural] == doctest::Approx(1.0 / 3.0));
  CHECK(rec[Assessment::articles] == 0.0);
  CHECK(rec[Assessment::word_count] == 3);
  CHECK(rec[Assessment::avg_word_length] == doctest::Approx(4.0 / 3.0));  // (1 + 1 + 2) / 3
  for (auto a : {Assessment::anxiety, Assessment::depression, Assessment::neuroticism, Assessment::extraversion}) {
    CHECK(rec[a] == 1.5);
  }
}

TEST_CASE("assess_responder: interviewer-only transcript") {
  const auto t = fixtures::transcript("r", "2012-01-01", {{Speaker::interviewer, "anything to add?"}, {Speaker::responder, "..."}});
  CHECK_THROWS_AS(assess_responder(t, fixtures::tiny_bundle()), EmptySpeech);
}

TEST_CASE("assess_responder: duplicating utterances only doubles word count") {
  auto t = fixtures::transcript("r", "2012-01-01",
                                {{Speaker::responder, "We went down there and I saw the smoke"},
                                 {Speaker::responder, "the fire was everywhere, we ran"}});
  const auto a = assess_responder(t, fixtures::tiny_bundle());
  const auto copy = t.utterances;
  for (auto u : copy) {
    u.start_time += 100;
    t.utterances.push_back(u);
  }
  const auto b = assess_responder(t, fixtures::tiny_bundle());
  for (std::size_t k = 0; k < kAssessmentCount; ++k) {
    if (k == static_cast<std::size_t>(Assessment::word_count)) {
      CHECK(b.scores[k] == 2 * a.scores[k]);
    } else {
      CHECK(b.scores[k] == doctest::Approx(a.scores[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("assess_cohort: exclusions and input order") {
  std::vector<Transcript> ts = {
      fixtures::transcript("c", "2012-01-01", {{Speaker::responder, "we we"}}),
      fixtures::transcript("a", "2012-01-01", {{Speaker::interviewer, "hello"}}),
      fixtures::transcript("b", "2012-01-01", {{Speaker::responder, "i am"}}),
  };
  const auto table = assess_cohort(ts, fixtures::tiny_bundle());
  REQUIRE(table.records.size() == 2);
  CHECK(table.records[0].responder_id == "c");
  CHECK(table.records[1].responder_id == "b");
  REQUIRE(table.exclusions.size() == 1);
  CHECK(table.exclusions[0].responder_id == "a");

  std::vector<Transcript> none = {ts[1]};
  CHECK_THROWS_AS(assess_cohort(none, fixtures::tiny_bundle()), CohortEmpty);
}

TEST_CASE("assess_cohort: identical tables for 1 and 8 jobs") {
  SynthConfig cfg;
  cfg.n_subjects = 40;
  cfg.words_per_subject = 800;
  cfg.baseline_mean = 45;
  cfg.baseline_sd = 10;
  const auto cohort = generate_cohort(cfg);
  std::ostringstream one, eight;
  write_assessment_table(one, assess_cohort(cohort.transcripts, cohort.bundle, 1));
  write_assessment_table(eight, assess_cohort(cohort.transcripts, cohort.bundle, 8));
  CHECK(one.str() == eight.str());

  std::istringstream in(one.str());
  std::ostringstream again;
  write_assessment_table(again, read_assessment_table(in));
  CHECK(again.str() == one.str());
}
