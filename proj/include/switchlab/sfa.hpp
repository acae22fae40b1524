#pragma once

#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "switchlab/polytope.hpp"

namespace switchlab {

/// Packets per route, m_i >= 0.
using OccupancyVector = std::vector<int>;

/// Per-pair counts m~_ji for the pairs (j, i) with R_ji > 0, listed resource-major.
struct StageOccupancy {
  struct Pair {
    std::size_t resource;
    std::size_t route;
    int count;
  };
  std::vector<Pair> pairs;

  /// m~_j = sum over pairs on resource j.
  std::vector<int> resource_totals(std::size_t n_resources) const;
  /// m_i = sum over pairs on route i.
  std::vector<int> route_totals(std::size_t n_routes) const;
};

inline constexpr int kBruteForceMaxTotal = 12;
inline constexpr std::size_t kBruteForceMaxPairs = 12;
/// Beyond this total the per-step rescaling in the dynamic program no longer bounds the
/// relative error of dropped underflowed buckets.
inline constexpr int kPhiDpHardMaxTotal = 700;

struct PhiOptions {
  int max_total = 40;
  std::size_t max_buckets = 20'000'000;
  /// Use the one-dimensional sum when the polytope is a 2x2 switch (four unit routes on a
  /// four-cycle of resources) instead of the general dynamic program.
  bool closed_forms = true;
};

/// Phi(m) by enumerating every stage decomposition in U(m). Zero if any m_i < 0.
double phi_bruteforce(std::span<const int> m, const ResourcePolytope& polytope,
                      int max_total = kBruteForceMaxTotal);

/// log Phi(m) by a route-by-route dynamic program over open per-resource totals.
/// Returns -infinity when some m_i < 0.
double log_phi_dp(std::span<const int> m, const ResourcePolytope& polytope, const PhiOptions& options = {});

/// exp(log_phi_dp(m)).
double phi_dp(std::span<const int> m, const ResourcePolytope& polytope, const PhiOptions& options = {});

/// SFA bandwidth phi_i(m) = Phi(m - e_i) / Phi(m); zero on empty routes.
std::vector<double> sfa_rates(std::span<const int> m, const ResourcePolytope& polytope,
                              const PhiOptions& options = {});

/// Memoized SFA rate evaluator shared by simulations over one polytope.
///
/// Safe for concurrent use: lookups take a shared lock, insertions an exclusive one.
/// The memo is dropped wholesale once it holds `cache_limit` occupancy vectors.
class SfaRateOracle {
public:
  explicit SfaRateOracle(ResourcePolytope polytope, PhiOptions options = {.max_total = kPhiDpHardMaxTotal},
                         std::size_t cache_limit = 2'000'000);

  const ResourcePolytope& polytope() const { return polytope_; }
  double log_phi(std::span<const int> m) const;
  std::vector<double> rates(std::span<const int> m) const;
  std::size_t cached_states() const;

private:
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept;
  };

  ResourcePolytope polytope_;
  PhiOptions options_;
  std::size_t cache_limit_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::vector<int>, double, KeyHash> log_phi_;
  mutable std::unordered_map<std::vector<int>, std::vector<double>, KeyHash> rates_;
};

/// Normalizer Phi = prod_j C_j / (C_j - (R lambda)_j). Throws InstabilityError unless R lambda < C.
double phi_normalizer(std::span<const double> lambda, const ResourcePolytope& polytope);

/// pi(m) = Phi(m) prod_i lambda_i^m_i / Phi.
double stationary_pi(std::span<const int> m, std::span<const double> lambda, const ResourcePolytope& polytope,
                     const PhiOptions& options = {});

/// pi~(m~) of the multiclass image.
double multiclass_pi(const StageOccupancy& stage, std::span<const double> lambda,
                     const ResourcePolytope& polytope);

/// prod_j (1 - rho~_j) rho~_j^{L_j}.
double resource_marginals(std::span<const int> levels, std::span<const double> rho_tilde);

/// P(sum_i m_i = L) as a convolution of independent per-resource geometric laws.
double total_count_distribution(int total, std::span<const double> lambda, const ResourcePolytope& polytope);

/// The same probability obtained by summing pi(m) over all m with |m| = L.
double total_count_distribution_direct(int total, std::span<const double> lambda,
                                       const ResourcePolytope& polytope, const PhiOptions& options = {});

/// 1/2 sum_j rho~_j / (1 - rho~_j).
double mean_workload(std::span<const double> rho_tilde);

/// Unique positive root of rho (e^theta - 1) = theta, for 0 < rho < 1.
double tail_exponent(double rho);

struct ExponentBounds {
  std::vector<double> per_resource;  // +inf for an unloaded resource
  double min = 0.0;
};

/// theta*_j solving sum_i lambda_i (e^{R_ji theta / C_j} - 1) = theta for every resource.
ExponentBounds lower_bound_exponents(std::span<const double> lambda, const ResourcePolytope& polytope);

/// n rho / (2 (1 - rho)).
double md1_lower_bound(int ports, double rho);

struct ProductFormSummary {
  std::vector<double> rho_tilde;
  double phi_norm = 0.0;
  double mean_workload = 0.0;
  double theta_star = 0.0;
};

ProductFormSummary summarize(std::span<const double> lambda, const ResourcePolytope& polytope);

}  // namespace switchlab
