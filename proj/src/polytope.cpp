#include "switchlab/polytope.hpp"

#include <algorithm>
#include <string>

#include "switchlab/errors.hpp"
#include "switchlab/schedule.hpp"

namespace switchlab {

ResourcePolytope::ResourcePolytope(std::vector<std::vector<double>> r_matrix, std::vector<double> capacities)
    : r_(std::move(r_matrix)), capacities_(std::move(capacities)) {
  if (r_.size() != capacities_.size())
    throw DimensionError("R has " + std::to_string(r_.size()) + " rows but C has " +
                         std::to_string(capacities_.size()) + " entries");
  if (r_.empty())
    throw DimensionError("resource polytope needs at least one resource");
  n_ = r_.front().size();
  for (const auto& row : r_) {
    if (row.size() != n_)
      throw DimensionError("ragged R matrix");
    for (double v : row)
      if (!(v >= 0.0))
        throw DomainError("R entries must be nonnegative");
  }
  for (double c : capacities_)
    if (!(c > 0.0))
      throw DomainError("capacities must be strictly positive");
  for (std::size_t i = 0; i < n_; ++i) {
    bool used = false;
    for (const auto& row : r_)
      used = used || row[i] > 0.0;
    if (!used)
      throw DomainError("route " + std::to_string(i) + " consumes no resource");
  }
}

std::vector<std::size_t> ResourcePolytope::routes_of(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_; ++i)
    if (r_[j][i] > 0.0)
      out.push_back(i);
  return out;
}

std::vector<std::size_t> ResourcePolytope::resources_of(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < rank(); ++j)
    if (r_[j][i] > 0.0)
      out.push_back(j);
  return out;
}

std::size_t ResourcePolytope::pair_count() const {
  std::size_t k = 0;
  for (const auto& row : r_)
    k += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double v) { return v > 0.0; }));
  return k;
}

bool ResourcePolytope::contains_all(const ScheduleSet& set, double tol) const {
  if (set.n_queues() != n_)
    throw DimensionError("schedule set and polytope disagree on N");
  for (const auto& s : set.schedules()) {
    for (std::size_t j = 0; j < rank(); ++j) {
      double used = 0.0;
      for (std::size_t i = 0; i < n_; ++i)
        used += r_[j][i] * s[i];
      if (used > capacities_[j] + tol)
        return false;
    }
  }
  return true;
}

std::vector<double> resource_loads(std::span<const double> lambda, const ResourcePolytope& polytope) {
  if (lambda.size() != polytope.n_routes())
    throw DimensionError("rate vector has " + std::to_string(lambda.size()) + " entries, polytope has " +
                         std::to_string(polytope.n_routes()) + " routes");
  for (double l : lambda)
    if (!(l >= 0.0))
      throw DomainError("arrival rates must be nonnegative");
  std::vector<double> out(polytope.rank(), 0.0);
  for (std::size_t j = 0; j < polytope.rank(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      s += polytope.consumption(j, i) * lambda[i];
    out[j] = s / polytope.capacity(j);
  }
  return out;
}

double load(std::span<const double> lambda, const ResourcePolytope& polytope) {
  const auto loads = resource_loads(lambda, polytope);
  return *std::max_element(loads.begin(), loads.end());
}

}  // namespace switchlab
