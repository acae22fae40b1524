#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "switchlab/schedule.hpp"

namespace switchlab {

/// Discrete-time queue state. Integer counters are exact; D is real-valued.
struct SnState {
  std::int64_t slot = 0;
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> cum_arrivals;
  std::vector<std::int64_t> cum_service;
  std::vector<std::int64_t> cum_idle;
  /// D(tau) = S^SFA(tau) - B(tau).
  std::vector<double> tracking;
  /// Slots in which each schedule of the set was used, indexed like the set.
  std::vector<std::int64_t> schedule_usage;

  static SnState empty(std::size_t n_queues, std::size_t n_schedules);
};

struct ScheduleChoice {
  Schedule schedule;
  /// True when the schedule came from a decomposition atom with coefficient >= 1.
  bool from_atom = false;
  /// rho(D) measured on the schedule set.
  double load = 0.0;
};

/// Emulation rule: decompose D over the set, take the largest atom with coefficient >= 1,
/// otherwise the largest sub-schedule that fits under D.
ScheduleChoice choose_schedule(std::span<const double> tracking, const ScheduleSet& set);

/// Lindley step: Q' = [Q - sigma]^+ + dA, dZ = [sigma - Q]^+, B += sigma, D += dS - sigma.
/// `allocation_increment` may be empty, in which case D is left alone.
/// Throws ContractViolation when sigma is not a member of `set`.
void apply_slot(SnState& state, const Schedule& sigma, std::span<const std::int64_t> arrivals,
                std::span<const double> allocation_increment, const ScheduleSet& set);

/// argmax over the set of sum_i sigma_i q_i^alpha; ties go to the lexicographically smallest.
Schedule mw_schedule(std::span<const std::int64_t> q, const ScheduleSet& set, double alpha);

}  // namespace switchlab
