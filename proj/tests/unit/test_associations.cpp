#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "langtraj/associations.hpp"
#include "langtraj/errors.hpp"
#include "langtraj/ols.hpp"
#include "oracles.hpp"

using namespace langtraj;
using V = std::vector<double>;

namespace {

AnalysisFrame::Column col(const V& v) { return {v.begin(), v.end()}; }

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("s" + std::to_string(1000 + i));
  return out;
}

/// Frame with feature x, outcome y = 0.4 x + 0.5 c + noise, covariate c.
AnalysisFrame random_frame(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  V x(n), c(n), y(n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    c[i] = 0.5 * x[i] + nd(rng);
    y[i] = 0.4 * x[i] + 0.5 * c[i] + nd(rng);
    m[i] = static_cast<double>(rng() % 2);
  }
  AnalysisFrame f(ids(n));
  f.set_column("x", col(x));
  f.set_column("c", col(c));
  f.set_column("y", col(y));
  f.set_column("marital_status", col(m));
  return f;
}

}  // namespace

TEST_CASE("estimate_association: covariate-free beta equals r") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_frame(rng, 40);
    const auto a = estimate_association(f, "x", "y", {});
    CHECK(std::abs(a.beta.value - a.r.value) < 1e-10);
    CHECK(a.n == 40);
    CHECK(a.r.ci.lo <= a.r.value);
    CHECK(a.beta.ci.hi >= a.beta.value);
  }
}

TEST_CASE("estimate_association: affine invariance and identity") {
  std::mt19937_64 rng(2);
  auto f = random_frame(rng, 50);
  const std::vector<std::string> covs = {"c"};
  const auto a = estimate_association(f, "x", "y", covs);
  const auto& x = f.column("x");
  AnalysisFrame::Column scaled;
  for (const auto& v : x) scaled.push_back(3.0 * *v + 7.0);
  f.set_column("x2", scaled);
  const auto b = estimate_association(f, "x2", "y", covs);
  CHECK(b.r.value == doctest::Approx(a.r.value).epsilon(1e-12));
  CHECK(b.beta.value == doctest::Approx(a.beta.value).epsilon(1e-12));
  CHECK(b.beta.p_raw == doctest::Approx(a.beta.p_raw).epsilon(1e-9));

  f.set_column("y_copy", f.column("y"));
  CHECK(estimate_association(f, "y_copy", "y", {}).r.value == doctest::Approx(1.0));
}

TEST_CASE("estimate_association: listwise deletion and minimum n") {
  std::mt19937_64 rng(3);
  auto f = random_frame(rng, 30);
  auto c = f.column("c");
  for (std::size_t i = 0; i < 5; ++i) c[i].reset();
  f.set_column("c", c);
  const std::vector<std::string> covs = {"c"};
  CHECK(estimate_association(f, "x", "y", covs).n == 25);
  CHECK(estimate_association(f, "x", "y", {}).n == 30);

  auto small = random_frame(rng, 9);
  CHECK_THROWS_AS(estimate_association(small, "x", "y", {}), SampleTooSmall);
}

TEST_CASE("association_table: separate BH families") {
  std::mt19937_64 rng(4);
  auto f = random_frame(rng, 60);
  std::normal_distribution<double> nd;
  for (const char* name : {"n1", "n2", "n3"}) {
    V v(60);
    for (auto& x : v) x = nd(rng);
    f.set_column(name, col(v));
  }
  const std::vector<std::string> features = {"x", "n1", "n2", "n3"};
  const std::vector<std::string> covs = {"c"};
  AnalysisOptions opt;
  const auto rows = association_table(f, features, "y", covs, opt);
  REQUIRE(rows.size() == 4);
  V r_raw, b_raw;
  for (const auto& r : rows) {
    r_raw.push_back(r.r.p_raw);
    b_raw.push_back(r.beta.p_raw);
  }
  const auto r_adj = oracle::bh(r_raw), b_adj = oracle::bh(b_raw);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].r.p_adj == doctest::Approx(r_adj[i]));
    CHECK(rows[i].beta.p_adj == doctest::Approx(b_adj[i]));
    CHECK(rows[i].beta.p_adj >= rows[i].beta.p_raw);
    CHECK(rows[i].beta.significant == (rows[i].beta.p_adj < opt.alpha));
    CHECK(rows[i].r.significant == (rows[i].r.p_adj < opt.alpha));
  }
}

TEST_CASE("suppression_scan layout") {
  std::mt19937_64 rng(5);
  auto f = random_frame(rng, 80);
  std::normal_distribution<double> nd;
  V noise(80);
  for (auto& v : noise) v = nd(rng);
  f.set_column("noise", col(noise));
  const std::vector<std::string> covs = {"c", "noise"};
  const auto row = suppression_scan(f, "x", "y", covs);
  REQUIRE(row.single_covariate.size() == 2);
  CHECK(row.single_covariate[0].first == "c");
  CHECK(row.single_covariate[1].first == "noise");
  CHECK(row.adjusted.value == doctest::Approx(estimate_association(f, "x", "y", covs).beta.value));
  CHECK(row.unadjusted.value == doctest::Approx(estimate_association(f, "x", "y", {}).r.value));
  const auto table = suppression_table(f, std::vector<std::string>{"x", "noise"}, "y", std::vector<std::string>{"c"});
  CHECK(table.size() == 2);
}

TEST_CASE("marital_mediation keeps n equal") {
  std::mt19937_64 rng(6);
  auto f = random_frame(rng, 40);
  auto m = f.column("marital_status");
  m[3].reset();
  m[7].reset();
  f.set_column("marital_status", m);
  const std::vector<std::string> covs = {"c"};
  const auto res = marital_mediation(f, "x", "y", covs);
  CHECK(res.without_marital.n == 38);
  CHECK(res.with_marital.n == 38);
}

TEST_CASE("marital_mediation attenuates under total confounding") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const std::size_t n = 400;
  V x(n), y(n), m(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    // the feature carries no outcome information beyond marital status
    m[i] = static_cast<double>(i % 2);
    x[i] = m[i] + 0.5 * nd(rng);
    y[i] = m[i] + nd(rng);
    c[i] = nd(rng);
  }
  AnalysisFrame f(ids(n));
  f.set_column("x", col(x));
  f.set_column("y", col(y));
  f.set_column("c", col(c));
  f.set_column("marital_status", col(m));
  const std::vector<std::string> covs = {"c"};
  const auto res = marital_mediation(f, "x", "y", covs);
  CHECK(std::abs(res.without_marital.beta.value) > 0.3);
  CHECK(std::abs(res.with_marital.beta.value) < 0.15);
  CHECK(std::abs(res.with_marital.beta.value) < std::abs(res.without_marital.beta.value) / 2);
}

namespace {

struct Panel {
  PclPanel panel;
  AnalysisFrame frame;
  std::vector<std::vector<std::pair<double, double>>> subjects;
  V x, c;
};

/// Subjects on either a shared grid (balanced) or random visit times.
Panel make_panel(std::mt19937_64& rng, std::size_t n, bool balanced, double noise, double a0 = -0.2,
                 double a1 = 1.3, double a2 = -0.6) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ut(0.2, 5.0);
  Panel p;
  p.x.resize(n);
  p.c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.x[i] = nd(rng);
    p.c[i] = 0.3 * p.x[i] + nd(rng);
  }
  const auto zx = oracle::zscore(p.x), zc = oracle::zscore(p.c);
  const auto names = ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double b0 = 30 + 5 * nd(rng);
    const double slope = a0 + a1 * zx[i] + a2 * zc[i];
    std::vector<TimedScore> pts;
    std::vector<std::pair<double, double>> raw;
    const std::size_t visits = balanced ? 4 : 3 + rng() % 4;
    for (std::size_t v = 0; v < visits; ++v) {
      const double t = balanced ? 0.5 + static_cast<double>(v) : ut(rng);
      const double y = b0 + slope * t + noise * nd(rng);
      pts.push_back({t, y});
      raw.emplace_back(t, y);
    }
    p.panel[names[i]] = pts;
    p.subjects.push_back(raw);
  }
  p.frame = AnalysisFrame(names);
  p.frame.set_column("x", col(p.x));
  p.frame.set_column("c", col(p.c));
  return p;
}

}  // namespace

TEST_CASE("joint_model matches the explicit dummy-variable regression") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = make_panel(rng, 25, false, 1.0);
    const std::vector<std::string> covs = {"c"};
    const auto est = joint_model(p.panel, p.frame, "x", covs);
    std::vector<std::vector<double>> z;
    const auto zx = oracle::zscore(p.x), zc = oracle::zscore(p.c);
    for (std::size_t i = 0; i < p.x.size(); ++i) z.push_back({zx[i], zc[i]});
    const auto [coef, se] = oracle::dummy_panel_ols(p.subjects, z);
    CHECK(std::abs(est.alpha1 - coef[1]) < 1e-8);
    CHECK(std::abs(est.se - se[1]) < 1e-8);
    CHECK(est.n_subjects == 25);
  }
}

TEST_CASE("joint_model: noise-free panel recovers alpha") {
  std::mt19937_64 rng(9);
  const auto p = make_panel(rng, 30, false, 0.0);
  const std::vector<std::string> covs = {"c"};
  CHECK(std::abs(joint_model(p.panel, p.frame, "x", covs).alpha1 - 1.3) < 1e-6);
}

TEST_CASE("joint and two-stage estimates agree on balanced panels") {
  std::mt19937_64 rng(10);
  const auto p = make_panel(rng, 40, true, 2.0);
  const std::vector<std::string> covs = {"c"};
  const auto est = joint_model(p.panel, p.frame, "x", covs);
  V slopes;
  for (const auto& id : p.frame.ids()) slopes.push_back(fit_subject_trajectory(p.panel.at(id)).slope);
  const auto d = standardized_design(slopes, std::vector<NamedColumn>{{"x", p.x}, {"c", p.c}}, false);
  CHECK(std::abs(ols(d).coefficients[1] - est.alpha1) < 1e-6);
}

TEST_CASE("joint_model_table applies BH") {
  std::mt19937_64 rng(11);
  const auto p = make_panel(rng, 30, false, 1.0);
  const auto rows = joint_model_table(p.panel, p.frame, std::vector<std::string>{"x", "c"}, {});
  REQUIRE(rows.size() == 2);
  const auto adj = oracle::bh({rows[0].p_raw, rows[1].p_raw});
  CHECK(rows[0].p_adj == doctest::Approx(adj[0]));
  CHECK(rows[1].p_adj == doctest::Approx(adj[1]));
}

TEST_CASE("tertile_trajectories") {
  std::mt19937_64 rng(12);
  const auto p = make_panel(rng, 6, false, 0.5);
  ScoreMap scores, baseline;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    scores[p.frame.ids()[i]] = p.x[i];
    baseline[p.frame.ids()[i]] = 30 + static_cast<double>(i);
  }
  const auto pair = tertile_trajectories("x", scores, p.panel, baseline, 5);
  CHECK(pair.top.members.size() == 2);
  CHECK(pair.bottom.members.size() == 2);
  CHECK(pair.top.group_size == 2);
  std::set<std::string> all(pair.top.members.begin(), pair.top.members.end());
  all.insert(pair.bottom.members.begin(), pair.bottom.members.end());
  CHECK(all.size() == 4);
  CHECK(pair.top.grid_t.size() == 5);
  CHECK(pair.top.grid_t.front() == 0.0);
  for (const auto& id : pair.top.members) {
    for (const auto& id2 : pair.bottom.members) CHECK(scores[id] >= scores[id2]);
  }

  // the slope driver separates the groups when it dominates
  const auto big = make_panel(rng, 90, false, 0.5, 0.0, 2.0, 0.0);
  ScoreMap s2, b2;
  for (std::size_t i = 0; i < big.x.size(); ++i) {
    s2[big.frame.ids()[i]] = big.x[i];
    b2[big.frame.ids()[i]] = 30;
  }
  b2.begin()->second = 31;  // avoid a constant baseline
  const auto sep = tertile_trajectories("x", s2, big.panel, b2);
  CHECK(sep.top.members.size() == 30);
  CHECK(sep.top.mean_slope > sep.bottom.mean_slope);
  CHECK(sep.top.mean_adjusted_pcl.back() - sep.top.mean_adjusted_pcl.front() >
        sep.bottom.mean_adjusted_pcl.back() - sep.bottom.mean_adjusted_pcl.front());

  ScoreMap five(scores);
  five.erase(five.begin());
  CHECK_THROWS_AS(tertile_trajectories("x", five, p.panel, baseline), SampleTooSmall);
}

TEST_CASE("build_analysis_frame columns") {
  AssessmentTable table;
  AnalysisSample sample;
  std::vector<Demographics> demo;
  std::vector<TrajectoryFit> fits;
  for (int i = 0; i < 3; ++i) {
    const std::string id = "r" + std::to_string(i);
    AssessmentRecord rec;
    rec.responder_id = id;
    rec.scores.fill(i);
    table.records.push_back(rec);
    SampleEntry e;
    e.responder_id = id;
    e.baseline_pcl = PclRecord{id, {}, 30.0 + i};
    e.eligible_concurrent = true;
    e.eligible_trajectory = i != 1;
    sample.entries.push_back(e);
    Demographics d;
    d.responder_id = id;
    d.age_at_interview = 50;
    d.gender = i == 0 ? Gender::female : Gender::male;
    d.occupation_police = true;
    d.marital_status = i == 2 ? MaritalStatus::unknown : MaritalStatus::married;
    d.years_since_911 = 10;
    demo.push_back(d);
    if (i != 1) fits.push_back({id, 30, -0.5 * i, 4, 0});
  }
  const auto conc = build_analysis_frame(table, sample, demo, fits, Eligibility::concurrent);
  CHECK(conc.size() == 3);
  CHECK(conc.column("gender")[0] == 1.0);
  CHECK(conc.column("gender")[1] == 0.0);
  CHECK_FALSE(conc.column("marital_status")[2].has_value());
  CHECK(*conc.column(kInterviewPclColumn)[1] == 31.0);
  const auto traj = build_analysis_frame(table, sample, demo, fits, Eligibility::trajectory);
  CHECK(traj.size() == 2);
  CHECK(*traj.column(kSlopeColumn)[1] == -1.0);
  CHECK(trajectory_covariates().size() == concurrent_covariates().size() + 1);
}
