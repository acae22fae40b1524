#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace switchlab {

struct ArrivalEvent {
  double time;
  std::size_t route;
};

/// Independent Poisson streams, one per route, each with its own seeded engine so a
/// route's arrival times do not depend on the other routes' rates.
class PoissonArrivals {
public:
  PoissonArrivals(std::span<const double> rates, std::uint64_t seed);

  /// Appends every arrival in (previous horizon, t_end] to `out`, ordered by (time, route).
  void draw_until(double t_end, std::vector<ArrivalEvent>& out);

private:
  std::vector<double> rates_;
  std::vector<std::mt19937_64> engines_;
  std::vector<double> next_;
};

}  // namespace switchlab
