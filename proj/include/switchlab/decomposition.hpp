#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "switchlab/schedule.hpp"

namespace switchlab {

/// One term alpha_sigma * sigma of a nonnegative combination of schedules.
struct Atom {
  Schedule schedule;
  double coefficient = 0.0;
};

/// Nonnegative combination of schedules, sum_sigma alpha_sigma sigma.
struct Decomposition {
  std::vector<Atom> atoms;

  double total() const;
  std::size_t support() const { return atoms.size(); }
  /// sum_sigma alpha_sigma sigma, a vector over n queues.
  std::vector<double> moment(std::size_t n) const;
  /// Coefficient of `s`, zero when absent.
  double coefficient_of(const Schedule& s) const;
};

/// Basic optimal solution of  min sum alpha  s.t.  sum alpha_sigma sigma >= target, alpha >= 0.
/// The returned total equals rho(target); at most N atoms are nonzero.
Decomposition solve_primal(std::span<const double> target, const ScheduleSet& set);

/// Load of `target` measured against the schedule set itself (optimum of the covering LP).
double schedule_load(std::span<const double> target, const ScheduleSet& set);

/// Moves surplus mass from sigma to sigma - e_i until sum alpha_sigma sigma == target.
/// Requires a feasible covering decomposition; throws ContractViolation otherwise.
/// Among candidate atoms the one with the largest coefficient is reduced first.
Decomposition tighten(const Decomposition& dec, std::span<const double> target);

/// Shrinks the support to at most N + 1 atoms while keeping sum alpha and sum alpha sigma.
/// Throws ReductionFailure if a null-space step is numerically singular.
Decomposition caratheodory_reduce(const Decomposition& dec);

/// argmax of sum_i sigma_i over sigma in `set` with sigma <= bound (+1e-9); ties go to the
/// lexicographically smallest schedule.
Schedule max_subschedule(std::span<const double> bound, const ScheduleSet& set);

}  // namespace switchlab
