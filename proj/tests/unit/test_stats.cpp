#include <doctest.h>

#include <random>

#include "langtraj/errors.hpp"
#include "langtraj/ols.hpp"
#include "langtraj/stats.hpp"
#include "oracles.hpp"

using namespace langtraj;
using V = std::vector<double>;

TEST_CASE("standardize") {
  const auto z = standardize(V{1, 2, 3});
  CHECK(z == V{-1, 0, 1});
  CHECK_THROWS_AS(standardize(V{5, 5, 5}), ConstantColumn);
  CHECK_THROWS_AS(standardize(V{5}), DomainError);

  const V x = {2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean(x) == 5.0);
  CHECK(sample_sd(x) == doctest::Approx(2.1381).epsilon(1e-4));
  CHECK(standardize(x)[0] == doctest::Approx(-1.4031).epsilon(1e-4));
}

TEST_CASE("pearson_r") {
  const V x = {1, 2, 3, 4};
  CHECK(pearson_r(x, x).r == 1.0);
  CHECK(pearson_r(x, V{2, 1, 4, 3}).r == doctest::Approx(0.6));
  CHECK_THROWS_AS(pearson_r(V{1, 2, 3}, V{1, 2, 3}), SampleTooSmall);
  CHECK_THROWS_AS(pearson_r(x, V{1, 1, 1, 1}), ConstantColumn);
  CHECK_THROWS_AS(pearson_r(x, V{1, 2}), DomainError);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    V a(30), b(30);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = nd(rng);
      b[i] = 0.5 * a[i] + nd(rng);
    }
    const auto c = pearson_r(a, b);
    CHECK(c.r == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-12));
    CHECK(c.ci.lo <= c.r);
    CHECK(c.r <= c.ci.hi);
    CHECK(c.p_value > 0.0);
    CHECK(c.p_value <= 1.0);
  }
}

TEST_CASE("fisher_ci reproduces published intervals") {
  auto check = [](double r, double lo, double hi) {
    const auto ci = fisher_ci(r, 75);
    CHECK(std::abs(ci.lo - lo) <= 0.02);
    CHECK(std::abs(ci.hi - hi) <= 0.02);
  };
  check(0.38, 0.16, 0.56);
  check(0.26, 0.03, 0.46);
  check(-0.36, -0.54, -0.14);
  CHECK_THROWS_AS(fisher_ci(0.3, 3), SampleTooSmall);
}

TEST_CASE("bh_adjust") {
  const auto adj = bh_adjust(V{0.01, 0.02, 0.04, 0.5});
  CHECK(adj[0] == doctest::Approx(0.04));
  CHECK(adj[1] == doctest::Approx(0.04));
  CHECK(adj[2] == doctest::Approx(0.04 * 4 / 3));
  CHECK(adj[3] == doctest::Approx(0.5));
  CHECK(bh_adjust(V{0.2, 0.2, 0.2}) == V{0.2, 0.2, 0.2});
  CHECK(bh_adjust(V{0.03}) == V{0.03});
  CHECK(bh_adjust(V{}).empty());
  CHECK_THROWS_AS(bh_adjust(V{0.1, 1.5}), DomainError);
  CHECK_THROWS_AS(bh_adjust(V{-0.1}), DomainError);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 100; ++trial) {
    V p(1 + rng() % 20);
    for (auto& x : p) x = trial % 4 == 0 ? std::round(u(rng) * 10) / 10 : u(rng);  // ties too
    const auto got = bh_adjust(p);
    const auto want = oracle::bh(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) < 1e-12);
      CHECK(got[i] >= p[i]);
    }
  }
}

namespace {

DesignMatrix random_design(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> nd;
  DesignMatrix d;
  d.rows.resize(n, k);
  d.outcome.resize(n);
  for (int j = 0; j < k; ++j) d.column_names.push_back("x" + std::to_string(j));
  for (int i = 0; i < n; ++i) {
    d.rows(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) d.rows(i, j) = nd(rng);
    d.outcome[i] = 1.0 + d.rows.row(i).sum() + nd(rng);
  }
  return d;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
  oracle::Matrix out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

}  // namespace

TEST_CASE("ols matches the normal-equations oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_design(rng, 20, 3);
    const auto fit = ols(d);
    const auto ref = oracle::normal_equations(to_rows(d.rows), V(d.outcome.data(), d.outcome.data() + d.outcome.size()));
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(fit.coefficients[j] - ref.beta[j]) < 1e-8);
      CHECK(std::abs(fit.standard_errors[j] - ref.se[j]) < 1e-8);
    }
    CHECK(fit.df == 17);
    CHECK(std::abs(fit.rss - ref.rss) < 1e-8);
    const auto ci = fit.ci(1);
    CHECK(ci.lo < fit.coefficients[1]);
    CHECK(fit.coefficients[1] < ci.hi);
  }
}

TEST_CASE("ols: exact fit and univariate identity") {
  DesignMatrix d;
  d.column_names = {"(intercept)", "x"};
  d.rows.resize(6, 2);
  d.outcome.resize(6);
  for (int i = 0; i < 6; ++i) {
    d.rows(i, 0) = 1;
    d.rows(i, 1) = i;
    d.outcome[i] = 3 + 2 * i;
  }
  const auto fit = ols(d);
  CHECK(fit.coefficients[1] == doctest::Approx(2.0));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.p_values[1] < 1e-10);
  CHECK(fit.index("x") == 1);
  CHECK_THROWS_AS(fit.index("nope"), DomainError);

  const V x = {0.3, 1.2, -0.4, 2.2, 0.9, -1.1, 0.0};
  const V y = {1.0, 2.5, 0.2, 2.0, 1.9, -0.5, 0.7};
  const auto sd = standardized_design(y, std::vector<NamedColumn>{{"x", x}});
  CHECK(std::abs(ols(sd).coefficients[1] - pearson_r(x, y).r) < 1e-10);
}

TEST_CASE("ols: rank deficiency names the dependent column") {
  DesignMatrix d;
  d.column_names = {"(intercept)", "a", "twice_a"};
  d.rows.resize(8, 3);
  d.outcome.resize(8);
  for (int i = 0; i < 8; ++i) {
    d.rows(i, 0) = 1;
    d.rows(i, 1) = i * i;
    d.rows(i, 2) = 2 * i * i;
    d.outcome[i] = i;
  }
  try {
    ols(d);
    FAIL("expected SingularDesign");
  } catch (const SingularDesign& e) {
    const std::string msg = e.what();
    CHECK((msg.find("a") != std::string::npos));
  }
  d.rows.conservativeResize(3, 3);
  d.outcome.conservativeResize(3);
  CHECK_THROWS_AS(ols(d), SampleTooSmall);
}

TEST_CASE("standardized_design") {
  const V y = {1, 2, 3, 4, 6};
  const auto d = standardized_design(y, std::vector<NamedColumn>{{"x", {5, 3, 2, 1, 0}}});
  CHECK(d.column_names == std::vector<std::string>{"(intercept)", "x"});
  CHECK(std::abs(d.rows.col(1).mean()) < 1e-12);
  CHECK(std::abs(d.outcome.mean()) < 1e-12);
  CHECK_THROWS_WITH_AS(standardized_design(y, std::vector<NamedColumn>{{"flat", {1, 1, 1, 1, 1}}}),
                       "column 'flat' is constant", ConstantColumn);
}
