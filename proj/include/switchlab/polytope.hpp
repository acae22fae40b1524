#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace switchlab {

class ScheduleSet;

/// Linear description {x in [0,1]^N : R x <= C} of the admissible region.
///
/// R is J x N with nonnegative entries and every column carries at least one strictly
/// positive entry; C is strictly positive.
class ResourcePolytope {
public:
  ResourcePolytope() = default;
  ResourcePolytope(std::vector<std::vector<double>> r_matrix, std::vector<double> capacities);

  std::size_t rank() const { return capacities_.size(); }
  std::size_t n_routes() const { return n_; }
  double consumption(std::size_t j, std::size_t i) const { return r_[j][i]; }
  double capacity(std::size_t j) const { return capacities_[j]; }
  const std::vector<std::vector<double>>& r_matrix() const { return r_; }
  const std::vector<double>& capacities() const { return capacities_; }

  /// Routes i with R_ji > 0.
  std::vector<std::size_t> routes_of(std::size_t j) const;
  /// Resources j with R_ji > 0.
  std::vector<std::size_t> resources_of(std::size_t i) const;
  /// Number of (j, i) pairs with R_ji > 0.
  std::size_t pair_count() const;

  /// True when every schedule sigma in `set` satisfies R sigma <= C + tol.
  bool contains_all(const ScheduleSet& set, double tol = 1e-9) const;

private:
  std::size_t n_ = 0;
  std::vector<std::vector<double>> r_;
  std::vector<double> capacities_;
};

/// Arrival-rate vector lambda.
struct RateVector {
  std::vector<double> rates;

  std::size_t size() const { return rates.size(); }
  double operator[](std::size_t i) const { return rates[i]; }
};

/// Per-resource loads rho~_j = (sum_i R_ji lambda_i) / C_j. Throws DomainError on a negative rate.
std::vector<double> resource_loads(std::span<const double> lambda, const ResourcePolytope& polytope);

/// rho(lambda) = max_j rho~_j.
double load(std::span<const double> lambda, const ResourcePolytope& polytope);
inline double load(const RateVector& lambda, const ResourcePolytope& polytope) {
  return load(lambda.rates, polytope);
}

}  // namespace switchlab
