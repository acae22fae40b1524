#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "switchlab/sfa.hpp"
#include "switchlab/switched_network.hpp"
#include "switchlab/topology.hpp"

namespace switchlab {

enum class Policy { emulation, max_weight };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& name);

/// Violation counts of the pathwise checks, one field per property.
struct InvariantCounters {
  std::int64_t workload_above_queue = 0;   // W_i <= Q_i
  std::int64_t queue_above_envelope = 0;   // Q_i <= W_i + D_i
  std::int64_t load_ceiling = 0;           // rho(D) <= N + 2
  std::int64_t mass_ceiling = 0;           // sum D <= K (N + 2)
  std::int64_t load_growth = 0;            // rho(D(t+1)) <= rho(D(t)) + 1
  std::int64_t service_above_tracking = 0; // sigma <= D
  std::int64_t negative_tracking = 0;      // D >= 0
  std::int64_t idling = 0;                 // Z == 0 under emulation
  std::int64_t conservation = 0;           // Q == A - B + Z
  std::int64_t increment_load = 0;         // load(dS) <= 1
  std::int64_t drift = 0;                  // D == S - B on audit slots

  std::int64_t total() const;
  void merge(const InvariantCounters& other);
  std::vector<std::pair<std::string, std::int64_t>> entries() const;
};

struct CoupledConfig {
  std::vector<double> lambda;
  Policy policy = Policy::emulation;
  double mw_alpha = 1.0;
  std::int64_t horizon = 100000;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  /// Abort on the first violation. Ignored (treated as false) when the topology's polytope
  /// is not an exact description of conv(S), since the bounds need not hold there.
  bool abort_on_violation = true;
  /// Per-slot CSV rows "slot,sumQ,sumW,rhoD,policy" every csv_stride slots when set.
  std::ostream* csv = nullptr;
  std::int64_t csv_stride = 1;
  /// Event trace of the virtual network when set.
  std::ostream* bn_trace = nullptr;
  /// Shared memo for SFA rates; built from the topology when null.
  std::shared_ptr<const SfaRateOracle> oracle;
  int batches = 20;
};

struct TraceSummary {
  Policy policy = Policy::emulation;
  std::int64_t slots = 0;
  std::int64_t measured_slots = 0;
  double mean_queue = 0.0;
  double mean_workload = 0.0;
  /// Means of sum Q over equal consecutive batches of the measured window.
  std::vector<double> batch_means;
  /// Counts of measured slots with sum Q == k.
  std::vector<std::int64_t> queue_histogram;
  std::vector<std::int64_t> schedule_usage;
  std::int64_t returns_to_empty = 0;
  std::int64_t atom_slots = 0;
  std::int64_t fallback_slots = 0;
  double max_tracking_load = 0.0;
  double max_tracking_mass = 0.0;
  InvariantCounters violations;
  SnState final_state;
  double wall_seconds = 0.0;
};

/// Runs SN and (under the emulation policy) BN side by side on one Poisson arrival stream.
/// Throws InvariantViolation with a dump of the slot when a check fails and aborting is on.
TraceSummary run_coupled(const Topology& topology, const CoupledConfig& config);

}  // namespace switchlab
