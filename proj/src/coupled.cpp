#include "switchlab/coupled.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "switchlab/arrivals.hpp"
#include "switchlab/bandwidth_network.hpp"
#include "switchlab/errors.hpp"

namespace switchlab {

namespace {

constexpr double kBoundTol = 1e-6;
constexpr double kServiceTol = 1e-9;
constexpr std::int64_t kAuditEvery = 10000;

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < v.size(); ++i)
    out << (i ? ", " : "") << v[i];
  out << ')';
  return out.str();
}

}  // namespace

std::string to_string(Policy p) {
  return p == Policy::emulation ? "emul" : "mw";
}

Policy policy_from_string(const std::string& name) {
  if (name == "emul")
    return Policy::emulation;
  if (name == "mw")
    return Policy::max_weight;
  throw ConfigError("policy must be 'emul' or 'mw', got '" + name + "'");
}

std::int64_t InvariantCounters::total() const {
  std::int64_t s = 0;
  for (const auto& [name, count] : entries())
    s += count;
  return s;
}

void InvariantCounters::merge(const InvariantCounters& o) {
  workload_above_queue += o.workload_above_queue;
  queue_above_envelope += o.queue_above_envelope;
  load_ceiling += o.load_ceiling;
  mass_ceiling += o.mass_ceiling;
  load_growth += o.load_growth;
  service_above_tracking += o.service_above_tracking;
  negative_tracking += o.negative_tracking;
  idling += o.idling;
  conservation += o.conservation;
  increment_load += o.increment_load;
  drift += o.drift;
}

std::vector<std::pair<std::string, std::int64_t>> InvariantCounters::entries() const {
  return {{"workload_above_queue", workload_above_queue},
          {"queue_above_envelope", queue_above_envelope},
          {"load_ceiling", load_ceiling},
          {"mass_ceiling", mass_ceiling},
          {"load_growth", load_growth},
          {"service_above_tracking", service_above_tracking},
          {"negative_tracking", negative_tracking},
          {"idling", idling},
          {"conservation", conservation},
          {"increment_load", increment_load},
          {"drift", drift}};
}

TraceSummary run_coupled(const Topology& topology, const CoupledConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const ScheduleSet& set = topology.schedules;
  const std::size_t n = topology.n_queues();
  if (config.lambda.size() != n)
    throw DimensionError("lambda has " + std::to_string(config.lambda.size()) + " entries, topology has " +
                         std::to_string(n) + " queues");
  if (config.horizon <= 0)
    throw ConfigError("horizon must be positive");
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0))
    throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (config.csv_stride <= 0)
    throw ConfigError("csv_stride must be positive");
  const double rho = load(config.lambda, topology.polytope);
  if (rho >= 1.0)
    std::cerr << "warning: load " << rho << " >= 1, queues will grow without bound\n";

  const bool emulate = config.policy == Policy::emulation;
  const bool abort = config.abort_on_violation && topology.exact_polytope;
  const double n_plus_2 = static_cast<double>(n) + 2.0;
  const double mass_cap = topology.k_max() * n_plus_2;

  std::unique_ptr<BandwidthNetwork> bn;
  if (emulate) {
    auto oracle = config.oracle ? config.oracle : std::make_shared<const SfaRateOracle>(topology.polytope);
    if (oracle->polytope().n_routes() != n)
      throw DimensionError("rate oracle does not match the topology");
    bn = std::make_unique<BandwidthNetwork>(oracle);
    bn->set_trace(config.bn_trace);
  }
  PoissonArrivals source(config.lambda, config.seed);

  TraceSummary out;
  out.policy = config.policy;
  SnState st = SnState::empty(n, set.size());
  const auto warmup = static_cast<std::int64_t>(std::floor(config.warmup_fraction * config.horizon));
  const std::int64_t measured = config.horizon - warmup;
  const std::int64_t batch_len = std::max<std::int64_t>(1, measured / std::max(1, config.batches));
  std::vector<double> batch_sums;
  double sum_q = 0.0, sum_w = 0.0;
  std::int64_t prev_total_q = 0;

  std::vector<double> prev_s(n, 0.0), increment(n, 0.0), w(n, 0.0);
  std::vector<std::int64_t> arrivals(n, 0);
  std::vector<ArrivalEvent> batch;
  double prev_load = 0.0;
  Schedule sigma(n);
  ScheduleChoice choice;

  if (config.csv)
    *config.csv << "slot,sumQ,sumW,rhoD,policy\n";

  auto violation = [&](std::int64_t& counter, const std::string& what) {
    ++counter;
    if (!abort)
      return;
    std::ostringstream msg;
    msg << "invariant '" << what << "' failed at slot " << st.slot << ": Q=" << join(st.q) << " D=" << join(st.tracking)
        << " W=" << join(w) << " sigma=" << sigma.to_string() << " dS=" << join(increment)
        << " rhoD=" << choice.load;
    throw InvariantViolation(msg.str());
  };

  for (std::int64_t tau = 0; tau < config.horizon; ++tau) {
    // Schedule for slot tau from the state at tau.
    if (emulate) {
      for (double d : st.tracking)
        if (d < -kServiceTol)
          violation(out.violations.negative_tracking, "D >= 0");
      choice = choose_schedule(st.tracking, set);
      sigma = choice.schedule;
      (choice.from_atom ? out.atom_slots : out.fallback_slots)++;
      double mass = 0.0;
      for (double d : st.tracking)
        mass += d;
      out.max_tracking_load = std::max(out.max_tracking_load, choice.load);
      out.max_tracking_mass = std::max(out.max_tracking_mass, mass);
      if (choice.load > n_plus_2 + kBoundTol)
        violation(out.violations.load_ceiling, "rho(D) <= N+2");
      if (mass > mass_cap + kBoundTol)
        violation(out.violations.mass_ceiling, "sum D <= K(N+2)");
      if (tau > 0 && choice.load > prev_load + 1.0 + kBoundTol)
        violation(out.violations.load_growth, "rho(D) grows by at most 1");
      prev_load = choice.load;
      if (!sigma.fits_under(st.tracking, kServiceTol))
        violation(out.violations.service_above_tracking, "sigma <= D");
    } else {
      sigma = mw_schedule(st.q, set, config.mw_alpha);
    }

    if (config.csv && tau % config.csv_stride == 0) {
      std::int64_t tq = 0;
      for (auto v : st.q)
        tq += v;
      *config.csv << tau << ',' << tq << ',';
      if (emulate)
        *config.csv << bn->total_workload() << ',' << choice.load;
      else
        *config.csv << "nan,nan";
      *config.csv << ',' << to_string(config.policy) << '\n';
    }

    // Arrivals during (tau, tau + 1].
    batch.clear();
    source.draw_until(static_cast<double>(tau + 1), batch);
    std::fill(arrivals.begin(), arrivals.end(), 0);
    for (const auto& ev : batch) {
      ++arrivals[ev.route];
      if (emulate)
        bn->inject_arrival(ev.route, ev.time);
    }
    if (emulate) {
      bn->advance_to(static_cast<double>(tau + 1));
      const auto& s = bn->slot_allocation(tau + 1);
      for (std::size_t i = 0; i < n; ++i) {
        increment[i] = s[i] - prev_s[i];
        prev_s[i] = s[i];
      }
      if (load(increment, topology.polytope) > 1.0 + kServiceTol)
        violation(out.violations.increment_load, "load(dS) <= 1");
    }

    apply_slot(st, sigma, arrivals, emulate ? std::span<const double>(increment) : std::span<const double>(), set);

    std::int64_t total_q = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total_q += st.q[i];
      if (st.q[i] != st.cum_arrivals[i] - st.cum_service[i] + st.cum_idle[i])
        violation(out.violations.conservation, "Q = A - B + Z");
    }
    double total_w = 0.0;
    if (emulate) {
      w = bn->workload();
      for (std::size_t i = 0; i < n; ++i) {
        total_w += w[i];
        if (st.cum_idle[i] != 0)
          violation(out.violations.idling, "Z = 0");
        if (w[i] > static_cast<double>(st.q[i]) + kBoundTol)
          violation(out.violations.workload_above_queue, "W <= Q");
        if (static_cast<double>(st.q[i]) > w[i] + st.tracking[i] + kBoundTol)
          violation(out.violations.queue_above_envelope, "Q <= W + D");
      }
      if (st.slot % kAuditEvery == 0)
        for (std::size_t i = 0; i < n; ++i)
          if (std::fabs(st.tracking[i] - (prev_s[i] - static_cast<double>(st.cum_service[i]))) > kBoundTol)
            violation(out.violations.drift, "D = S - B");
    }

    if (st.slot > warmup) {
      const std::int64_t k = st.slot - warmup - 1;
      sum_q += static_cast<double>(total_q);
      sum_w += total_w;
      if (out.queue_histogram.size() <= static_cast<std::size_t>(total_q))
        out.queue_histogram.resize(static_cast<std::size_t>(total_q) + 1, 0);
      ++out.queue_histogram[static_cast<std::size_t>(total_q)];
      const auto b = static_cast<std::size_t>(k / batch_len);
      if (b < static_cast<std::size_t>(config.batches)) {
        if (batch_sums.size() <= b)
          batch_sums.resize(b + 1, 0.0);
        batch_sums[b] += static_cast<double>(total_q);
      }
      if (total_q == 0 && prev_total_q > 0)
        ++out.returns_to_empty;
    }
    prev_total_q = total_q;
  }

  out.slots = config.horizon;
  out.measured_slots = measured;
  out.mean_queue = measured > 0 ? sum_q / static_cast<double>(measured) : 0.0;
  out.mean_workload = emulate && measured > 0 ? sum_w / static_cast<double>(measured) : std::nan("");
  for (std::size_t b = 0; b < batch_sums.size(); ++b)
    if (static_cast<std::int64_t>(b + 1) * batch_len <= measured)
      out.batch_means.push_back(batch_sums[b] / static_cast<double>(batch_len));
  out.schedule_usage = st.schedule_usage;
  out.final_state = std::move(st);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace switchlab
