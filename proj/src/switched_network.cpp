#include "switchlab/switched_network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "switchlab/decomposition.hpp"
#include "switchlab/errors.hpp"

namespace switchlab {

namespace {

constexpr double kAtomTol = 1e-9;

}  // namespace

SnState SnState::empty(std::size_t n_queues, std::size_t n_schedules) {
  SnState s;
  s.q.assign(n_queues, 0);
  s.cum_arrivals.assign(n_queues, 0);
  s.cum_service.assign(n_queues, 0);
  s.cum_idle.assign(n_queues, 0);
  s.tracking.assign(n_queues, 0.0);
  s.schedule_usage.assign(n_schedules, 0);
  return s;
}

ScheduleChoice choose_schedule(std::span<const double> tracking, const ScheduleSet& set) {
  const std::size_t n = set.n_queues();
  if (tracking.size() != n)
    throw DimensionError("tracking vector has " + std::to_string(tracking.size()) + " entries, expected " +
                         std::to_string(n));
  // Round-off can leave D a hair below zero; the caller audits D >= -1e-9 separately.
  std::vector<double> d(tracking.begin(), tracking.end());
  for (double& v : d)
    v = std::max(v, 0.0);

  ScheduleChoice out;
  auto dec = solve_primal(d, set);
  out.load = dec.total();
  if (out.load >= 1.0 - kAtomTol) {
    auto reduced = caratheodory_reduce(tighten(dec, d));
    const Atom* best = nullptr;
    for (const auto& a : reduced.atoms)
      if (a.coefficient >= 1.0 - kAtomTol && (!best || a.coefficient > best->coefficient))
        best = &a;
    if (best) {
      out.schedule = best->schedule;
      out.from_atom = true;
      return out;
    }
  }
  out.schedule = max_subschedule(d, set);
  return out;
}

void apply_slot(SnState& state, const Schedule& sigma, std::span<const std::int64_t> arrivals,
                std::span<const double> allocation_increment, const ScheduleSet& set) {
  const std::size_t n = state.q.size();
  if (sigma.size() != n || arrivals.size() != n)
    throw DimensionError("slot update with mismatched lengths");
  if (!allocation_increment.empty() && allocation_increment.size() != n)
    throw DimensionError("allocation increment has the wrong length");
  const auto k = set.index_of(sigma);
  if (!k)
    throw ContractViolation("schedule " + sigma.to_string() + " is not in the schedule set");
  if (state.schedule_usage.size() != set.size())
    state.schedule_usage.resize(set.size(), 0);

  for (std::size_t i = 0; i < n; ++i) {
    if (arrivals[i] < 0)
      throw DomainError("negative arrival count");
    const std::int64_t served = sigma[i];
    const std::int64_t idle = std::max<std::int64_t>(served - state.q[i], 0);
    state.q[i] = std::max<std::int64_t>(state.q[i] - served, 0) + arrivals[i];
    state.cum_arrivals[i] += arrivals[i];
    state.cum_service[i] += served;
    state.cum_idle[i] += idle;
    if (!allocation_increment.empty())
      state.tracking[i] += allocation_increment[i] - static_cast<double>(served);
  }
  ++state.schedule_usage[*k];
  ++state.slot;
}

Schedule mw_schedule(std::span<const std::int64_t> q, const ScheduleSet& set, double alpha) {
  if (!(alpha > 0.0))
    throw DomainError("MW exponent must be positive");
  if (q.size() != set.n_queues())
    throw DimensionError("queue vector does not match the schedule set");
  std::vector<double> w(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    w[i] = q[i] > 0 ? std::pow(static_cast<double>(q[i]), alpha) : 0.0;
  const Schedule* best = nullptr;
  double best_weight = -1.0;
  for (const auto& s : set.schedules()) {
    double weight = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (s[i])
        weight += w[i];
    if (weight > best_weight) {
      best_weight = weight;
      best = &s;
    }
  }
  return *best;
}

}  // namespace switchlab
