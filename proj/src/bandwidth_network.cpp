#include "switchlab/bandwidth_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "switchlab/arrivals.hpp"
#include "switchlab/errors.hpp"

namespace switchlab {

namespace {

constexpr double kResidualEps = 1e-12;
constexpr double kRebaseAt = 1024.0;
constexpr double kClockTol = 1e-9;

}  // namespace

std::vector<double> BnStatistics::total_count_law() const {
  std::vector<double> law(time_at_total.size(), 0.0);
  if (elapsed <= 0.0)
    return law;
  for (std::size_t k = 0; k < law.size(); ++k)
    law[k] = time_at_total[k] / elapsed;
  return law;
}

BandwidthNetwork::BandwidthNetwork(std::shared_ptr<const SfaRateOracle> oracle) : oracle_(std::move(oracle)) {
  if (!oracle_)
    throw DomainError("bandwidth network needs a rate oracle");
  const std::size_t n = oracle_->polytope().n_routes();
  tags_.resize(n);
  virtual_time_.assign(n, 0.0);
  tag_sum_.assign(n, 0.0);
  counts_.assign(n, 0);
  rates_.assign(n, 0.0);
  cumulative_.assign(n, 0.0);
}

void BandwidthNetwork::refresh_rates() {
  if (total_count_ == 0) {
    std::fill(rates_.begin(), rates_.end(), 0.0);
    return;
  }
  rates_ = oracle_->rates(counts_);
  for (std::size_t i = 0; i < rates_.size(); ++i)
    if (counts_[i] > 0 && !(rates_[i] > 0.0))
      throw ConsistencyError("route " + std::to_string(i) + " holds packets but gets rate " +
                             std::to_string(rates_[i]));
}

void BandwidthNetwork::drain(double dt) {
  if (dt <= 0.0)
    return;
  double sum_rates = 0.0;
  for (double r : rates_)
    sum_rates += r;
  stats_.elapsed += dt;
  if (stats_.time_at_total.size() <= static_cast<std::size_t>(total_count_))
    stats_.time_at_total.resize(static_cast<std::size_t>(total_count_) + 1, 0.0);
  stats_.time_at_total[static_cast<std::size_t>(total_count_)] += dt;
  stats_.workload_integral += total_workload() * dt - 0.5 * sum_rates * dt * dt;

  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (counts_[i] == 0)
      continue;
    virtual_time_[i] += rates_[i] / counts_[i] * dt;
    cumulative_[i] += rates_[i] * dt;
  }
  clock_ += dt;
}

void BandwidthNetwork::pop_finished(std::size_t forced_route) {
  bool changed = false;
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    while (!tags_[i].empty() && (i == forced_route || tags_[i].front() - virtual_time_[i] <= kResidualEps)) {
      tag_sum_[i] -= tags_[i].front();
      tags_[i].pop_front();
      --counts_[i];
      --total_count_;
      ++stats_.departures;
      changed = true;
      if (i == forced_route)
        forced_route = std::numeric_limits<std::size_t>::max();
      trace("departure", i);
    }
    if (tags_[i].empty()) {
      virtual_time_[i] = 0.0;
      tag_sum_[i] = 0.0;
    } else if (virtual_time_[i] > kRebaseAt) {
      const double shift = virtual_time_[i];
      for (double& t : tags_[i])
        t -= shift;
      tag_sum_[i] -= shift * counts_[i];
      virtual_time_[i] = 0.0;
    }
  }
  if (changed)
    refresh_rates();
}

void BandwidthNetwork::advance_to(double t_end) {
  if (t_end < clock_ - kClockTol)
    throw OrderingError("cannot advance from " + std::to_string(clock_) + " back to " + std::to_string(t_end));
  pop_finished(std::numeric_limits<std::size_t>::max());
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t who = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (counts_[i] == 0)
        continue;
      const double dt = (tags_[i].front() - virtual_time_[i]) * counts_[i] / rates_[i];
      if (dt < best) {
        best = dt;
        who = i;
      }
    }
    if (who == std::numeric_limits<std::size_t>::max() || clock_ + best > t_end)
      break;
    drain(best);
    pop_finished(who);
  }
  drain(t_end - clock_);
  clock_ = std::max(clock_, t_end);
  pop_finished(std::numeric_limits<std::size_t>::max());
}

void BandwidthNetwork::inject_arrival(std::size_t route, double time) {
  if (route >= tags_.size())
    throw DimensionError("route " + std::to_string(route) + " out of range");
  if (time < clock_ - kClockTol)
    throw OrderingError("arrival at " + std::to_string(time) + " precedes clock " + std::to_string(clock_));
  // Departures strictly before the arrival, then the arrival itself.
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t who = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (counts_[i] == 0)
        continue;
      const double dt = (tags_[i].front() - virtual_time_[i]) * counts_[i] / rates_[i];
      if (dt < best) {
        best = dt;
        who = i;
      }
    }
    if (who == std::numeric_limits<std::size_t>::max() || clock_ + best >= time)
      break;
    drain(best);
    pop_finished(who);
  }
  drain(time - clock_);
  clock_ = std::max(clock_, time);

  const double tag = virtual_time_[route] + 1.0;
  tags_[route].push_back(tag);
  tag_sum_[route] += tag;
  ++counts_[route];
  ++total_count_;
  ++stats_.arrivals;
  trace("arrival", route);
  refresh_rates();
}

const std::vector<double>& BandwidthNetwork::slot_allocation(std::int64_t slot) const {
  if (std::fabs(clock_ - static_cast<double>(slot)) > kClockTol)
    throw OrderingError("slot_allocation(" + std::to_string(slot) + ") with clock at " + std::to_string(clock_));
  return cumulative_;
}

std::vector<double> BandwidthNetwork::workload() const {
  std::vector<double> w(tags_.size(), 0.0);
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (counts_[i] > 0)
      w[i] = std::max(0.0, tag_sum_[i] - counts_[i] * virtual_time_[i]);
  return w;
}

double BandwidthNetwork::total_workload() const {
  double s = 0.0;
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (counts_[i] > 0)
      s += tag_sum_[i] - counts_[i] * virtual_time_[i];
  return std::max(0.0, s);
}

std::vector<double> BandwidthNetwork::residuals(std::size_t route) const {
  std::vector<double> out;
  for (double t : tags_.at(route))
    out.push_back(t - virtual_time_[route]);
  return out;
}

void BandwidthNetwork::set_trace(std::ostream* out) {
  trace_ = out;
  if (trace_)
    *trace_ << "time,event,route,m\n";
}

void BandwidthNetwork::trace(const char* event, std::size_t route) {
  if (!trace_)
    return;
  *trace_ << clock_ << ',' << event << ',' << route << ',';
  for (std::size_t i = 0; i < counts_.size(); ++i)
    *trace_ << (i ? ";" : "") << counts_[i];
  *trace_ << '\n';
}

void BandwidthNetwork::reset_statistics() {
  stats_ = BnStatistics{};
}

BnStatistics simulate_bandwidth_network(std::shared_ptr<const SfaRateOracle> oracle,
                                        std::span<const double> lambda, double horizon, double warmup,
                                        std::uint64_t seed) {
  if (lambda.size() != oracle->polytope().n_routes())
    throw DimensionError("rate vector does not match the network");
  if (!(horizon > warmup) || warmup < 0.0)
    throw DomainError("need 0 <= warmup < horizon");
  BandwidthNetwork bn(std::move(oracle));
  PoissonArrivals source(lambda, seed);
  std::vector<ArrivalEvent> batch;
  bool warm = warmup == 0.0;
  // Arrivals are drawn one time unit at a time to keep memory flat.
  for (double t = 0.0; t < horizon;) {
    const double next = std::min(horizon, t + 1.0);
    batch.clear();
    source.draw_until(next, batch);
    for (const auto& ev : batch) {
      if (!warm && ev.time >= warmup) {
        bn.advance_to(warmup);
        bn.reset_statistics();
        warm = true;
      }
      bn.inject_arrival(ev.route, ev.time);
    }
    if (!warm && next >= warmup) {
      bn.advance_to(warmup);
      bn.reset_statistics();
      warm = true;
    }
    bn.advance_to(next);
    t = next;
  }
  return bn.statistics();
}

}  // namespace switchlab
