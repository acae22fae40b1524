#include "switchlab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "switchlab/errors.hpp"
#include "switchlab/simplex.hpp"

namespace switchlab {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDropTol = 1e-14;

void check_target(std::span<const double> target, std::size_t n) {
  if (target.size() != n)
    throw DimensionError("target has " + std::to_string(target.size()) + " entries, expected " + std::to_string(n));
  for (double v : target)
    if (!(v >= 0.0))
      throw DomainError("decomposition target must be nonnegative");
}

std::size_t infer_n(const Decomposition& dec) {
  return dec.atoms.empty() ? 0 : dec.atoms.front().schedule.size();
}

}  // namespace

double Decomposition::total() const {
  double s = 0.0;
  for (const auto& a : atoms)
    s += a.coefficient;
  return s;
}

std::vector<double> Decomposition::moment(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  for (const auto& a : atoms) {
    if (a.schedule.size() != n)
      throw DimensionError("atom length mismatch");
    for (std::size_t i = 0; i < n; ++i)
      if (a.schedule[i])
        out[i] += a.coefficient;
  }
  return out;
}

double Decomposition::coefficient_of(const Schedule& s) const {
  double c = 0.0;
  for (const auto& a : atoms)
    if (a.schedule == s)
      c += a.coefficient;
  return c;
}

Decomposition solve_primal(std::span<const double> target, const ScheduleSet& set) {
  const std::size_t n = set.n_queues();
  check_target(target, n);
  Decomposition dec;
  if (std::all_of(target.begin(), target.end(), [](double v) { return v == 0.0; }))
    return dec;

  // Columns: one alpha per schedule, then one surplus variable per queue.
  const std::size_t ns = set.size();
  lp::Problem p;
  p.a.assign(n, std::vector<double>(ns + n, 0.0));
  p.b.assign(target.begin(), target.end());
  p.c.assign(ns + n, 0.0);
  for (std::size_t k = 0; k < ns; ++k) {
    p.c[k] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      p.a[i][k] = set[k][i];
  }
  for (std::size_t i = 0; i < n; ++i)
    p.a[i][ns + i] = -1.0;

  // alpha_{e_i} = target_i is feasible and its basis matrix is the identity.
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i)
    basis[i] = *set.index_of(Schedule::unit(n, i));

  const auto sol = lp::solve(p, std::move(basis));
  for (std::size_t k = 0; k < ns; ++k)
    if (sol.x[k] > kDropTol)
      dec.atoms.push_back({set[k], sol.x[k]});
  return dec;
}

double schedule_load(std::span<const double> target, const ScheduleSet& set) {
  return solve_primal(target, set).total();
}

Decomposition tighten(const Decomposition& dec, std::span<const double> target) {
  const std::size_t n = target.size();
  std::map<Schedule, double> alpha;
  for (const auto& a : dec.atoms) {
    if (a.schedule.size() != n)
      throw DimensionError("atom length does not match target");
    if (a.coefficient < -kFeasTol)
      throw ContractViolation("negative coefficient " + std::to_string(a.coefficient) + " on " +
                              a.schedule.to_string());
    if (a.coefficient > 0.0)
      alpha[a.schedule] += a.coefficient;
  }
  std::vector<double> sums(n, 0.0);
  for (const auto& [s, c] : alpha)
    for (std::size_t i = 0; i < n; ++i)
      if (s[i])
        sums[i] += c;
  for (std::size_t i = 0; i < n; ++i)
    if (sums[i] < target[i] - kFeasTol)
      throw ContractViolation("decomposition covers only " + std::to_string(sums[i]) + " of target " +
                              std::to_string(target[i]) + " on queue " + std::to_string(i));

  // Moving mass from sigma to sigma - e_i only changes coordinate i, so each queue's gap
  // can be closed independently.
  for (std::size_t i = 0; i < n; ++i) {
    double gap = sums[i] - target[i];
    while (gap > 0.0) {
      auto pick = alpha.end();
      for (auto it = alpha.begin(); it != alpha.end(); ++it)
        if (it->first[i] && it->second > 0.0 && (pick == alpha.end() || it->second > pick->second))
          pick = it;
      if (pick == alpha.end()) {
        if (gap <= kFeasTol)
          break;
        throw ContractViolation("no atom left to reduce on queue " + std::to_string(i));
      }
      const double eps = std::min(pick->second, gap);
      Schedule lower = pick->first;
      lower.set(i, false);
      if (pick->second - eps <= kDropTol * std::max(1.0, eps))
        alpha.erase(pick);
      else
        pick->second -= eps;
      alpha[lower] += eps;
      gap -= eps;
    }
  }

  Decomposition out;
  for (const auto& [s, c] : alpha)
    if (c > 0.0)
      out.atoms.push_back({s, c});
  return out;
}

Decomposition caratheodory_reduce(const Decomposition& dec) {
  const std::size_t n = infer_n(dec);
  std::map<Schedule, double> merged;
  for (const auto& a : dec.atoms)
    if (a.coefficient > 0.0)
      merged[a.schedule] += a.coefficient;
  std::vector<Atom> atoms;
  for (const auto& [s, c] : merged)
    atoms.push_back({s, c});

  const std::size_t rows = n + 1;
  while (atoms.size() > rows) {
    // Any n + 2 columns (sigma; 1) are linearly dependent.
    const std::size_t cols = rows + 1;
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols, 0.0));
    for (std::size_t k = 0; k < cols; ++k) {
      for (std::size_t i = 0; i < n; ++i)
        m[i][k] = atoms[k].schedule[i];
      m[n][k] = 1.0;
    }
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t k = 0; k < cols && r < rows; ++k) {
      std::size_t best = r;
      for (std::size_t i = r + 1; i < rows; ++i)
        if (std::abs(m[i][k]) > std::abs(m[best][k]))
          best = i;
      if (std::abs(m[best][k]) < 1e-12)
        continue;
      std::swap(m[r], m[best]);
      const double p = m[r][k];
      for (double& v : m[r])
        v /= p;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == r || m[i][k] == 0.0)
          continue;
        const double f = m[i][k];
        for (std::size_t c = 0; c < cols; ++c)
          m[i][c] -= f * m[r][c];
      }
      pivot_col.push_back(k);
      ++r;
    }
    std::size_t free_col = cols;
    for (std::size_t k = 0; k < cols; ++k)
      if (std::find(pivot_col.begin(), pivot_col.end(), k) == pivot_col.end()) {
        free_col = k;
        break;
      }
    if (free_col == cols)
      throw ReductionFailure("no free column in null-space step");

    std::vector<double> v(cols, 0.0);
    v[free_col] = 1.0;
    for (std::size_t row = 0; row < pivot_col.size(); ++row)
      v[pivot_col[row]] = -m[row][free_col];
    double scale = 0.0;
    for (double x : v)
      scale = std::max(scale, std::abs(x));
    if (scale < 1e-12)
      throw ReductionFailure("null-space direction vanished");
    bool any_positive = false;
    for (double& x : v) {
      x /= scale;
      any_positive = any_positive || x > 1e-12;
    }
    if (!any_positive)
      for (double& x : v)
        x = -x;

    std::size_t hit = cols;
    double step = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      if (v[k] <= 1e-12)
        continue;
      const double s = atoms[k].coefficient / v[k];
      if (hit == cols || s < step) {
        hit = k;
        step = s;
      }
    }
    if (hit == cols)
      throw ReductionFailure("null-space direction has no positive entry");
    for (std::size_t k = 0; k < cols; ++k)
      atoms[k].coefficient = std::max(0.0, atoms[k].coefficient - step * v[k]);
    atoms[hit].coefficient = 0.0;
    std::erase_if(atoms, [](const Atom& a) { return a.coefficient <= kDropTol; });
  }

  Decomposition out;
  out.atoms = std::move(atoms);
  return out;
}

Schedule max_subschedule(std::span<const double> bound, const ScheduleSet& set) {
  check_target(bound, set.n_queues());
  const Schedule* best = nullptr;
  int best_weight = -1;
  // Schedules are stored in lexicographic order, so the first maximizer found wins ties.
  for (const auto& s : set.schedules()) {
    const int w = s.weight();
    if (w > best_weight && s.fits_under(bound)) {
      best = &s;
      best_weight = w;
    }
  }
  return *best;
}

}  // namespace switchlab
