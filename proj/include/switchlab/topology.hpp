#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "switchlab/polytope.hpp"
#include "switchlab/schedule.hpp"

namespace switchlab {

/// A named network: its schedule set, a resource description, and a label per queue.
struct Topology {
  std::string name;
  ScheduleSet schedules;
  ResourcePolytope polytope;
  std::vector<std::string> labels;
  /// Ports per side for input-queued switches, 0 otherwise.
  int ports = 0;
  /// True when conv(S) is known to coincide with {x : R x <= C}.
  bool exact_polytope = true;

  std::size_t n_queues() const { return schedules.n_queues(); }
  int k_max() const { return schedules.k_max(); }
};

inline constexpr int kMaxSwitchPorts = 4;
inline constexpr std::size_t kMaxIndependentSetNodes = 16;
inline constexpr int kMaxParallelQueues = 8;

/// n x n input-queued switch; queue (k, l) has index k * n + l.
/// Resources: one row per input port, then one per output port.
Topology iq_switch(int n);

/// Independent sets of an undirected graph. Resources: one row per edge, then a box row per
/// isolated node. Throws DomainError on a non-symmetric or non-binary adjacency matrix.
Topology independent_set(const std::vector<std::vector<int>>& adjacency);

/// n parallel unit servers (first) and one server pooled over n queues (second).
std::pair<Topology, Topology> parallel_vs_pooled(int n);

/// One queue with one unit server.
Topology single_queue();

/// Two routes and two unit resources, R = [[1, 1], [0, 1]].
Topology two_route_network();

/// Reads {"adjacency": [[...], ...]} from a JSON file.
std::vector<std::vector<int>> load_adjacency(const std::string& path);

/// Resolves a CLI spec: iq:<n>, pooled:<n>, parallel:<n>, single, pair,
/// independent-set:<file>, file:<path>.
Topology make_topology(const std::string& spec);

/// Compares the schedule-set LP load with max_j (R x)_j / C_j on `samples` random points.
/// Returns false as soon as they disagree by more than 1e-7.
bool polytope_matches_schedules(const Topology& topology, int samples, std::uint64_t seed);

}  // namespace switchlab
