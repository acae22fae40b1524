#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "switchlab/sfa.hpp"

namespace switchlab {

/// Time averages accumulated by a BandwidthNetwork since its last statistics reset.
struct BnStatistics {
  double elapsed = 0.0;
  /// Time spent with sum_i M_i == k, indexed by k.
  std::vector<double> time_at_total;
  /// Integral of sum_i W_i(t) dt.
  double workload_integral = 0.0;
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;

  double mean_workload() const { return elapsed > 0.0 ? workload_integral / elapsed : 0.0; }
  /// Empirical law of the total count (time fractions).
  std::vector<double> total_count_law() const;
};

/// Continuous-time bandwidth-sharing network under the SFA allocation with unit packets.
///
/// Packets on route i share phi_i(M) equally, so every residual on a route drains at the
/// same speed and departures leave in arrival order. Each route keeps its packets as finish
/// tags against a per-route virtual clock; the residual of a packet is tag - virtual time.
class BandwidthNetwork {
public:
  explicit BandwidthNetwork(std::shared_ptr<const SfaRateOracle> oracle);

  double clock() const { return clock_; }
  std::size_t n_routes() const { return tags_.size(); }

  /// Advances to `time`, then adds one packet of size 1.0 on `route`. Departures due at
  /// exactly `time` are handled after the arrival.
  void inject_arrival(std::size_t route, double time);
  /// Runs departures up to and including t_end.
  void advance_to(double t_end);
  /// S^SFA at the integer time `slot`; the clock must sit on that slot.
  const std::vector<double>& slot_allocation(std::int64_t slot) const;

  const std::vector<double>& cumulative() const { return cumulative_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<double>& rates() const { return rates_; }
  std::vector<double> workload() const;
  double total_workload() const;
  /// Residuals on one route, oldest packet first.
  std::vector<double> residuals(std::size_t route) const;

  /// CSV lines "time,event,route,m" are written here when set.
  void set_trace(std::ostream* out);
  void reset_statistics();
  const BnStatistics& statistics() const { return stats_; }

private:
  void refresh_rates();
  void drain(double dt);
  void pop_finished(std::size_t forced_route);
  void trace(const char* event, std::size_t route);

  std::shared_ptr<const SfaRateOracle> oracle_;
  double clock_ = 0.0;
  std::vector<std::deque<double>> tags_;
  std::vector<double> virtual_time_;
  std::vector<double> tag_sum_;
  std::vector<int> counts_;
  int total_count_ = 0;
  std::vector<double> rates_;
  std::vector<double> cumulative_;
  BnStatistics stats_;
  std::ostream* trace_ = nullptr;
};

/// Runs the network alone under Poisson arrivals of the given rates for `horizon` time
/// units and returns statistics gathered after `warmup`.
BnStatistics simulate_bandwidth_network(std::shared_ptr<const SfaRateOracle> oracle,
                                        std::span<const double> lambda, double horizon, double warmup,
                                        std::uint64_t seed);

}  // namespace switchlab
