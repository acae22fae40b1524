#pragma once

// Independent reference computations used to check library results.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Solve the dense square system a x = b by Gaussian elimination with partial pivoting.
// Returns false when the matrix is (numerically) singular.
inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c]))
        piv = r;
    if (std::fabs(a[piv][c]) < 1e-12)
      return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c)
        continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k)
        a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = b[i] / a[i][i];
  return true;
}

// min sum alpha s.t. sum alpha_k col_k >= target, alpha >= 0, by enumerating every basis
// of the equality form (schedule columns plus surplus columns).
inline double covering_lp_by_vertices(const std::vector<std::vector<int>>& schedules,
                                      const std::vector<double>& target) {
  const std::size_t n = target.size();
  const std::size_t ns = schedules.size();
  const std::size_t cols = ns + n;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
    if (depth == n) {
      std::vector<std::vector<double>> a(n, std::vector<double>(n));
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r)
          a[r][c] = pick[c] < ns ? schedules[pick[c]][r] : (pick[c] - ns == r ? -1.0 : 0.0);
      std::vector<double> x;
      if (!solve_square(a, target, x))
        return;
      double obj = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (x[c] < -1e-10)
          return;
        if (pick[c] < ns)
          obj += x[c];
      }
      best = std::min(best, obj);
      return;
    }
    for (std::size_t k = start; k < cols; ++k) {
      pick[depth] = k;
      rec(depth + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Every binary vector of length n dominated by one of `gens`, plus zero and the unit vectors.
inline std::vector<std::vector<int>> closure_by_scan(const std::vector<std::vector<int>>& gens, std::size_t n) {
  std::vector<std::vector<int>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> v(n);
    int weight = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = (mask >> i) & 1U;
      weight += v[i];
    }
    bool keep = weight <= 1;
    for (const auto& g : gens) {
      bool under = true;
      for (std::size_t i = 0; i < n; ++i)
        under = under && v[i] <= g[i];
      keep = keep || under;
    }
    if (keep)
      out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// max(row sums, column sums) of an n x n rate matrix stored row-major.
inline double iq_load(const std::vector<double>& lambda, std::size_t n) {
  double best = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double row = 0.0, col = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      row += lambda[a * n + b];
      col += lambda[b * n + a];
    }
    best = std::max({best, row, col});
  }
  return best;
}

// Newton's method from the right of the root for g(theta) = rho (e^theta - 1) - theta.
inline double newton_tail_exponent(double rho) {
  double t = 2.0 * std::log(1.0 / rho) + 2.0;
  for (int it = 0; it < 200; ++it) {
    const double g = rho * std::expm1(t) - t;
    const double dg = rho * std::exp(t) - 1.0;
    const double step = g / dg;
    t -= step;
    if (std::fabs(step) < 1e-15 * t)
      break;
  }
  return t;
}

inline double geometric_pmf(double rho, int k) {
  return (1.0 - rho) * std::pow(rho, k);
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
