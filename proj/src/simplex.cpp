#include "switchlab/simplex.hpp"

#include <cmath>
#include <limits>

#include "switchlab/errors.hpp"

namespace switchlab::lp {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kCostTol = 1e-12;
constexpr std::size_t kMaxPivots = 100000;

// Gauss-Jordan pivot on tableau row r, column k. Row m is the reduced-cost row.
void pivot(std::vector<std::vector<double>>& t, std::size_t r, std::size_t k) {
  auto& prow = t[r];
  const double p = prow[k];
  for (double& v : prow)
    v /= p;
  prow[k] = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == r)
      continue;
    const double f = t[i][k];
    if (f == 0.0)
      continue;
    auto& row = t[i];
    for (std::size_t col = 0; col < row.size(); ++col)
      row[col] -= f * prow[col];
    row[k] = 0.0;
  }
}

}  // namespace

Solution solve(const Problem& problem, std::vector<std::size_t> start_basis) {
  const std::size_t m = problem.b.size();
  const std::size_t n = problem.c.size();
  if (problem.a.size() != m || start_basis.size() != m)
    throw DimensionError("LP: row count mismatch");

  // Tableau: m constraint rows [A | b] plus the reduced-cost row [c | -objective].
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    if (problem.a[i].size() != n)
      throw DimensionError("LP: ragged constraint matrix");
    std::copy(problem.a[i].begin(), problem.a[i].end(), t[i].begin());
    t[i][n] = problem.b[i];
  }
  std::copy(problem.c.begin(), problem.c.end(), t[m].begin());

  std::vector<std::size_t>& basis = start_basis;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t k = basis[r];
    if (k >= n || std::abs(t[r][k]) < kPivotTol) {
      // Fall back to any row that still has a usable entry in this column.
      std::size_t alt = m;
      for (std::size_t i = r; i < m; ++i)
        if (k < n && std::abs(t[i][k]) >= kPivotTol) {
          alt = i;
          break;
        }
      if (alt == m)
        throw DomainError("LP: start basis is singular");
      std::swap(t[r], t[alt]);
    }
    pivot(t, r, k);
  }
  for (std::size_t r = 0; r < m; ++r)
    if (t[r][n] < -1e-9)
      throw DomainError("LP: start basis is infeasible");

  Solution sol;
  for (;;) {
    std::size_t enter = n;
    for (std::size_t k = 0; k < n; ++k)
      if (t[m][k] < -kCostTol) {
        enter = k;
        break;
      }
    if (enter == n)
      break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = t[r][enter];
      if (a <= kPivotTol)
        continue;
      const double ratio = std::max(t[r][n], 0.0) / a;
      if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave != m && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == m)
      throw DomainError("LP: objective unbounded below");
    pivot(t, leave, enter);
    basis[leave] = enter;
    if (++sol.pivots > kMaxPivots)
      throw Error("LP: pivot limit exceeded");
  }

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    sol.x[basis[r]] = std::max(t[r][n], 0.0);
  sol.objective = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    sol.objective += problem.c[k] * sol.x[k];
  sol.basis = std::move(basis);
  return sol;
}

}  // namespace switchlab::lp
