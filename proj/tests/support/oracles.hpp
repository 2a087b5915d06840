#pragma once

// Independent reference implementations used only by the tests. None of
// these call into the library: plain loops, textbook formulas, O(n^2) where
// that makes the definition more obvious.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

/// Step-up BH straight from the definition: for each p_i with rank r_i,
/// adjusted = min over all k with rank >= r_i of m * p_k / rank_k, capped at 1.
inline std::vector<double> bh(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> rank(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < p[i] || (p[j] == p[i] && j < i)) ++r;
    }
    rank[i] = r;
  }
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (rank[k] >= rank[i]) best = std::min(best, static_cast<double>(m) * p[k] / static_cast<double>(rank[k]));
    }
    out[i] = best;
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Two-pass product-moment correlation.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Simple-regression slope and intercept as cov(t, y) / var(t).
inline std::pair<double, double> cov_var_line(const std::vector<double>& t, const std::vector<double>& y) {
  const double mt = mean(t), my = mean(y);
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  const double slope = sty / stt;
  return {my - slope * mt, slope};
}

using Matrix = std::vector<std::vector<double>>;  // row-major

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

struct OlsResult {
  std::vector<double> beta;
  std::vector<double> se;
  std::vector<double> residuals;
  double rss = 0;
};

/// beta = (X'X)^-1 X'y; se_j = sqrt(sigma^2 [(X'X)^-1]_jj), sigma^2 = rss / (n - k - absorbed).
inline OlsResult normal_equations(const Matrix& x, const std::vector<double>& y, std::size_t absorbed = 0) {
  const std::size_t n = x.size(), k = x.front().size();
  Matrix xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
    }
  }
  const auto inv = invert(xtx);
  OlsResult r;
  r.beta.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) r.beta[a] += inv[a][b] * xty[b];
  }
  r.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0;
    for (std::size_t a = 0; a < k; ++a) fit += x[i][a] * r.beta[a];
    r.residuals[i] = y[i] - fit;
    r.rss += r.residuals[i] * r.residuals[i];
  }
  const double sigma2 = r.rss / static_cast<double>(n - k - absorbed);
  for (std::size_t a = 0; a < k; ++a) r.se.push_back(std::sqrt(sigma2 * inv[a][a]));
  return r;
}

/// Panel model with explicit subject-intercept dummies:
///   y_it = b0_i + (a0 + sum_j a_j z_ij) t + e_it
/// Returns (coefficients, se) of [a0, a1, ...]. `subjects[i]` holds (t, y)
/// pairs; `z[i]` the subject's standardized regressors.
inline std::pair<std::vector<double>, std::vector<double>> dummy_panel_ols(
    const std::vector<std::vector<std::pair<double, double>>>& subjects, const std::vector<std::vector<double>>& z) {
  const std::size_t s = subjects.size(), p = z.front().size();
  Matrix x;
  std::vector<double> y;
  for (std::size_t i = 0; i < s; ++i) {
    for (const auto& [t, v] : subjects[i]) {
      std::vector<double> row(s + 1 + p, 0.0);
      row[i] = 1.0;
      row[s] = t;
      for (std::size_t j = 0; j < p; ++j) row[s + 1 + j] = t * z[i][j];
      x.push_back(std::move(row));
      y.push_back(v);
    }
  }
  const auto r = normal_equations(x, y);
  return {std::vector<double>(r.beta.begin() + static_cast<long>(s), r.beta.end()),
          std::vector<double>(r.se.begin() + static_cast<long>(s), r.se.end())};
}

/// Sample-SD z-scores.
inline std::vector<double> zscore(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  std::vector<double> out;
  for (double x : v) out.push_back((x - m) / sd);
  return out;
}

}  // namespace oracle
