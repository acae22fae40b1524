#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "switchlab/coupled.hpp"
#include "switchlab/polytope.hpp"
#include "switchlab/topology.hpp"

namespace switchlab {

struct ExperimentConfig {
  std::string topology = "iq:2";
  /// Explicit rates; when empty, `rho` selects a uniform load.
  std::vector<double> lambda;
  std::optional<double> rho;
  Policy policy = Policy::emulation;
  double mw_alpha = 1.0;
  std::int64_t horizon = 100000;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  int replications = 1;
  int threads = 0;  // 0: one per hardware thread
  bool abort_on_violation = true;
  double tail_tolerance = 0.15;
  std::string csv_path;      // per-slot rows; replication r > 0 goes to <stem>.rep<r><ext>
  std::int64_t csv_stride = 1;
  std::string summary_path;  // JSON summary
  std::string ccdf_path;     // ell, ccdf, log_ccdf
  std::string trace_path;    // event trace of the virtual network, replication 0 only
};

/// Parses a JSON config. Unknown fields and wrong types raise ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// lambda_{k l} = rho / n on an n x n switch.
RateVector uniform_switch_rates(int n, double rho);

/// Equal rates on every queue, scaled so that load(lambda) = rho.
std::vector<double> uniform_load_rates(const Topology& topology, double rho);

struct TailFit {
  double slope = 0.0;
  std::int64_t window_low = 0;
  std::int64_t window_high = 0;
  std::int64_t samples = 0;
};

inline constexpr std::int64_t kMinTailSamples = 10000;
inline constexpr std::int64_t kMinTailExceedances = 100;

/// Least-squares slope of log P(X >= l) for l between the median and the largest l with at
/// least 100 exceedances. `histogram[k]` counts samples equal to k.
TailFit estimate_tail_exponent(std::span<const std::int64_t> histogram);
/// Same fit from raw nonnegative integer samples.
TailFit estimate_tail_exponent_from_samples(std::span<const std::int64_t> samples);

struct Verdict {
  std::string id;
  std::string description;
  double simulated = 0.0;
  double stderr_ = 0.0;
  double analytic = 0.0;
  double tolerance = 0.0;
  bool asserted = true;
  bool pass = true;
  std::string detail;
};

struct Analytics {
  std::vector<double> rho_tilde;
  double load = 0.0;
  double mean_workload = 0.0;
  double theta_star = 0.0;
  double lower_exponent = 0.0;
  double mean_bound = 0.0;  // 1/2 sum rho~/(1 - rho~) + K (N + 2)
  std::optional<double> md1_bound;  // uniform switches only
};

Analytics analyze(const Topology& topology, std::span<const double> lambda);

struct ExperimentReport {
  ExperimentConfig config;
  Topology topology;
  std::vector<double> lambda;
  Analytics analytics;
  std::vector<TraceSummary> replications;
  double mean_queue = 0.0;
  double stderr_queue = 0.0;
  double mean_workload = 0.0;
  std::vector<std::int64_t> queue_histogram;
  std::optional<TailFit> tail;
  std::string tail_error;
  InvariantCounters violations;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
};

/// Runs the replications (concurrently), merges them in index order and evaluates verdicts.
/// Writes the configured CSV, trace, ccdf and summary files.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Verdicts (a) mean bound, (b) M/D/1 lower bound, (c) tail slope, (d) invariant counters,
/// plus the (1 - rho) Q sandwich for uniform switches under the emulation policy.
std::vector<Verdict> verdict_suite(const ExperimentReport& report);

nlohmann::json summary_json(const ExperimentReport& report);
void write_verdicts(std::ostream& out, const std::vector<Verdict>& verdicts);

/// Rows "quantity,parameters,value" of the closed-form quantities for a network and load.
void write_analytics_csv(std::ostream& out, const Topology& topology, std::span<const double> lambda);

}  // namespace switchlab
