#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/trajectory.hpp"
#include "oracles.hpp"

using namespace langtraj;

namespace {

TrajectoryFit fit(std::vector<TimedScore> pts) { return fit_subject_trajectory(pts); }

}  // namespace

TEST_CASE("fit_subject_trajectory: worked examples") {
  auto f = fit({{1, 30}, {2, 32}, {3, 34}});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(28.0));
  CHECK(f.rss == doctest::Approx(0.0));
  CHECK(f.n_points == 3);

  CHECK(fit({{1, 40}, {2, 40}, {3, 40}}).slope == 0.0);

  f = fit({{1, 30}, {2, 35}, {3, 31}});
  CHECK(f.slope == doctest::Approx(0.5));
  CHECK(f.intercept == doctest::Approx(31.0));
}

TEST_CASE("fit_subject_trajectory: degenerate designs") {
  CHECK_THROWS_AS(fit({{1, 30}, {2, 35}}), DegenerateDesign);
  CHECK_THROWS_AS(fit({{2, 30}, {2, 35}, {2, 31}}), DegenerateDesign);
}

TEST_CASE("fit_subject_trajectory: oracle and invariances") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t_dist(0.1, 6.0), y_dist(17, 85);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    std::vector<TimedScore> pts(n);
    std::vector<double> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i] = {t_dist(rng), y_dist(rng)};
      t[i] = pts[i].t;
      y[i] = pts[i].pcl;
    }
    const auto f = fit_subject_trajectory(pts);
    const auto [b0, b1] = oracle::cov_var_line(t, y);
    CHECK(f.slope == doctest::Approx(b1).epsilon(1e-10));
    CHECK(std::abs(f.intercept - b0) < 1e-9);
    CHECK(f.rss >= 0.0);

    auto shifted = pts;
    for (auto& p : shifted) p.t += 2.5;
    const auto fs = fit_subject_trajectory(shifted);
    CHECK(std::abs(fs.slope - f.slope) < 1e-10);
    CHECK(std::abs(fs.intercept - (f.intercept - f.slope * 2.5)) < 1e-9);

    auto scaled = pts;
    for (auto& p : scaled) p.t *= 4.0;
    CHECK(fit_subject_trajectory(scaled).slope == f.slope / 4.0);

    // the fitted line's own predictions do not move the fit
    auto extended = pts;
    for (double tt : {0.5, 1.7, 4.2}) extended.push_back({tt, f.intercept + f.slope * tt});
    const auto fe = fit_subject_trajectory(extended);
    CHECK(std::abs(fe.slope - f.slope) < 1e-10);
    CHECK(std::abs(fe.intercept - f.intercept) < 1e-9);
  }
}

TEST_CASE("compute_time_offsets") {
  const Date iv = fixtures::day("2012-01-01");
  std::vector<PclRecord> recs = {{"r", add_days(iv, -5), 30}, {"r", iv, 31}, {"r", add_days(iv, 548), 32},
                                 {"r", add_days(iv, 365), 33}};
  const auto pts = compute_time_offsets(recs, iv);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].t == doctest::Approx(1.5).epsilon(0.01));
  CHECK(pts[0].t == 548 / 365.25);
  CHECK(pts[1].pcl == 33);
  // 1461 days are exactly four 365.25-day years
  recs = {{"r", add_days(iv, 1461), 40}};
  CHECK(compute_time_offsets(recs, iv)[0].t == 4.0);
}

TEST_CASE("trajectory table round-trip") {
  std::vector<TrajectoryFit> fits = {{"a", 30.25, -1.5, 4, 2.0}, {"b", 40, 0.1, 3, 0}};
  std::ostringstream out;
  write_trajectory_table(out, fits);
  std::istringstream in(out.str());
  const auto back = read_trajectory_table(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].responder_id == "a");
  CHECK(back[0].slope == -1.5);
  CHECK(back[1].n_points == 3);
}
