#pragma once

#include <cstddef>
#include <vector>

namespace switchlab::lp {

/// Dense equality-form LP:  minimize c^T x  subject to  A x = b, x >= 0.
struct Problem {
  std::vector<std::vector<double>> a;  // m rows, n columns
  std::vector<double> b;               // m entries, b >= 0
  std::vector<double> c;               // n entries
};

struct Solution {
  std::vector<double> x;
  std::vector<std::size_t> basis;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Primal simplex with Bland's anti-cycling rule, started from a caller-supplied feasible
/// basis (m column indices whose submatrix is nonsingular and yields x_B >= 0).
/// Throws DomainError if the problem is unbounded or the start basis is infeasible.
Solution solve(const Problem& problem, std::vector<std::size_t> start_basis);

}  // namespace switchlab::lp
