#include "switchlab/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "switchlab/errors.hpp"

namespace switchlab {

PoissonArrivals::PoissonArrivals(std::span<const double> rates, std::uint64_t seed)
    : rates_(rates.begin(), rates.end()) {
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!(rates_[i] >= 0.0) || !std::isfinite(rates_[i]))
      throw DomainError("arrival rates must be finite and nonnegative");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), 0x51a7e5u};
    engines_.emplace_back(seq);
    next_.push_back(rates_[i] > 0.0 ? std::exponential_distribution<double>(rates_[i])(engines_[i])
                                    : std::numeric_limits<double>::infinity());
  }
}

void PoissonArrivals::draw_until(double t_end, std::vector<ArrivalEvent>& out) {
  const std::size_t first = out.size();
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (rates_[i] == 0.0)
      continue;
    std::exponential_distribution<double> gap(rates_[i]);
    while (next_[i] <= t_end) {
      out.push_back({next_[i], i});
      next_[i] += gap(engines_[i]);
    }
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(), [](const auto& a, const auto& b) {
    return a.time != b.time ? a.time < b.time : a.route < b.route;
  });
}

}  // namespace switchlab
