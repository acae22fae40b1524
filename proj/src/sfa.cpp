#include "switchlab/sfa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>

#include "switchlab/errors.hpp"

namespace switchlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_occupancy(std::span<const int> m, const ResourcePolytope& polytope) {
  if (m.size() != polytope.n_routes())
    throw DimensionError("occupancy has " + std::to_string(m.size()) + " routes, polytope has " +
                         std::to_string(polytope.n_routes()));
}

bool has_negative(std::span<const int> m) {
  return std::any_of(m.begin(), m.end(), [](int v) { return v < 0; });
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k)
    f *= k;
  return f;
}

// Pascal's triangle up to the hard DP cap; binom(700, 350) ~ 1e209 stays finite.
const std::vector<std::vector<double>>& binomial_table() {
  static const auto table = [] {
    std::vector<std::vector<double>> t(kPhiDpHardMaxTotal + 1);
    for (int n = 0; n <= kPhiDpHardMaxTotal; ++n) {
      t[n].assign(n + 1, 1.0);
      for (int k = 1; k < n; ++k)
        t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
void compositions(int total, std::size_t parts, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == parts) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  if (parts == 0) {
    if (total == 0)
      out.emplace_back();
    return;
  }
  rec(0, total);
}

// theta > 0 with g(theta) = 0 for a convex g with g(0) = 0 and g'(0) < 0.
double convex_positive_root(const std::function<double(double)>& g) {
  double hi = 1.0;
  while (g(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12)
      throw DomainError("no positive root found while bracketing");
  }
  double lo = hi / 2.0;
  while (g(lo) >= 0.0) {
    lo /= 2.0;
    if (lo < 1e-300)
      throw DomainError("no negative value found near zero");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Route indices in the roles (a, b, c, d) of a 2x2 switch: a and b share one resource,
// a and c another, d shares a resource with b and one with c. Every R_ji / C_j is 1.
std::optional<std::array<std::size_t, 4>> four_cycle_roles(const ResourcePolytope& p) {
  if (p.n_routes() != 4 || p.rank() != 4)
    return std::nullopt;
  std::array<std::vector<std::size_t>, 4> res;
  for (std::size_t i = 0; i < 4; ++i) {
    res[i] = p.resources_of(i);
    if (res[i].size() != 2)
      return std::nullopt;
    for (std::size_t j : res[i])
      if (p.consumption(j, i) != p.capacity(j))
        return std::nullopt;
  }
  for (std::size_t j = 0; j < 4; ++j)
    if (p.routes_of(j).size() != 2)
      return std::nullopt;
  auto other_route = [&](std::size_t j, std::size_t i) {
    const auto r = p.routes_of(j);
    return r[0] == i ? r[1] : r[0];
  };
  auto other_resource = [&](std::size_t i, std::size_t j) { return res[i][0] == j ? res[i][1] : res[i][0]; };
  const std::size_t a = 0;
  const std::size_t b = other_route(res[a][0], a);
  const std::size_t c = other_route(res[a][1], a);
  if (b == c)
    return std::nullopt;
  const std::size_t d = 6 - a - b - c;
  const std::size_t rb = other_resource(b, res[a][0]);
  const std::size_t rc = other_resource(c, res[a][1]);
  if (rb == rc || other_route(rb, b) != d || other_route(rc, c) != d)
    return std::nullopt;
  return std::array<std::size_t, 4>{a, b, c, d};
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Summing the two inner route splits with sum_k C(a+k, a) C(b+n-k, b) = C(a+b+n+1, n) leaves
//   Phi = sum_u c(u) C(m_b + m_d + 1 + u, m_b) C(m_a + m_c + 1 - u, m_c),
// u = k_a - k_d over -m_d..m_a, with c(u) the number of such pairs.
double log_phi_four_cycle(int ma, int mb, int mc, int md) {
  const int big_a = mb + md + 1;
  const int big_b = ma + mc + 1;
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(ma + md + 1));
  double lt = log_binomial(big_a - md, mb) + log_binomial(big_b + md, mc);
  for (int u = -md; u <= ma; ++u) {
    if (u > -md) {
      // Ratio of consecutive terms, from u - 1 to u.
      lt += std::log(static_cast<double>(big_a + u)) - std::log(static_cast<double>(big_a + u - mb)) +
            std::log(static_cast<double>(big_b - u + 1 - mc)) - std::log(static_cast<double>(big_b - u + 1));
    }
    const int count = std::min(ma, md + u) - std::max(0, u) + 1;
    const double v = lt + std::log(static_cast<double>(count));
    terms.push_back(v);
    peak = std::max(peak, v);
  }
  double s = 0.0;
  for (double v : terms)
    s += std::exp(v - peak);
  return peak + std::log(s);
}

}  // namespace

std::vector<int> StageOccupancy::resource_totals(std::size_t n_resources) const {
  std::vector<int> t(n_resources, 0);
  for (const auto& p : pairs)
    t.at(p.resource) += p.count;
  return t;
}

std::vector<int> StageOccupancy::route_totals(std::size_t n_routes) const {
  std::vector<int> t(n_routes, 0);
  for (const auto& p : pairs)
    t.at(p.route) += p.count;
  return t;
}

double phi_bruteforce(std::span<const int> m, const ResourcePolytope& polytope, int max_total) {
  check_occupancy(m, polytope);
  if (has_negative(m))
    return 0.0;
  const int total = std::accumulate(m.begin(), m.end(), 0);
  if (total > max_total)
    throw CapacityError("brute-force Phi limited to total occupancy " + std::to_string(max_total));
  if (polytope.pair_count() > kBruteForceMaxPairs)
    throw CapacityError("brute-force Phi limited to " + std::to_string(kBruteForceMaxPairs) + " resource-route pairs");

  const std::size_t n = polytope.n_routes();
  const std::size_t nres = polytope.rank();
  std::vector<std::vector<std::size_t>> res_of(n);
  std::vector<std::vector<std::vector<int>>> splits(n);
  for (std::size_t i = 0; i < n; ++i) {
    res_of[i] = polytope.resources_of(i);
    compositions(m[i], res_of[i].size(), splits[i]);
  }

  // counts[j][i] holds m~_ji for the decomposition currently being enumerated.
  std::vector<std::vector<int>> counts(nres, std::vector<int>(n, 0));
  double sum = 0.0;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      double term = 1.0;
      for (std::size_t j = 0; j < nres; ++j) {
        int tot = 0;
        double denom = 1.0;
        for (std::size_t r = 0; r < n; ++r) {
          const int c = counts[j][r];
          if (c == 0)
            continue;
          tot += c;
          denom *= factorial(c);
          term *= std::pow(polytope.consumption(j, r) / polytope.capacity(j), c);
        }
        term *= factorial(tot) / denom;
      }
      sum += term;
      return;
    }
    for (const auto& split : splits[i]) {
      for (std::size_t a = 0; a < split.size(); ++a)
        counts[res_of[i][a]][i] = split[a];
      rec(i + 1);
    }
    for (std::size_t j : res_of[i])
      counts[j][i] = 0;
  };
  rec(0);
  return sum;
}

double log_phi_dp(std::span<const int> m, const ResourcePolytope& polytope, const PhiOptions& options) {
  check_occupancy(m, polytope);
  if (has_negative(m))
    return kNegInf;
  const int total = std::accumulate(m.begin(), m.end(), 0);
  if (total > options.max_total || total > kPhiDpHardMaxTotal)
    throw CapacityError("Phi dynamic program limited to total occupancy " +
                        std::to_string(std::min(options.max_total, kPhiDpHardMaxTotal)) + ", got " +
                        std::to_string(total));
  if (total == 0)
    return 0.0;
  if (options.closed_forms)
    if (auto roles = four_cycle_roles(polytope))
      return log_phi_four_cycle(m[(*roles)[0]], m[(*roles)[1]], m[(*roles)[2]], m[(*roles)[3]]);

  const std::size_t n = polytope.n_routes();
  const std::size_t nres = polytope.rank();
  const auto& binom = binomial_table();

  // Only busy routes contribute; a resource closes once its last busy route is placed.
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i)
    if (m[i] > 0)
      pending.push_back(i);
  std::vector<int> routes_left(nres, 0);
  for (std::size_t i : pending)
    for (std::size_t j : polytope.resources_of(i))
      ++routes_left[j];

  // Open resources and the largest total each can hold so far.
  std::vector<std::size_t> open;
  std::vector<int> bound;
  std::vector<double> values{1.0};
  double log_scale = 0.0;

  auto layout_size = [&](const std::vector<int>& b) {
    std::size_t s = 1;
    for (int v : b) {
      s *= static_cast<std::size_t>(v + 1);
      if (s > options.max_buckets)
        throw CapacityError("Phi dynamic program exceeds bucket limit");
    }
    return s;
  };

  while (!pending.empty()) {
    // Greedy order: place the route that leaves the fewest buckets behind.
    std::size_t best_pos = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pending.size(); ++p) {
      const std::size_t i = pending[p];
      double cost = 1.0;
      std::vector<int> left = routes_left;
      for (std::size_t j : polytope.resources_of(i))
        --left[j];
      for (std::size_t j = 0; j < nres; ++j) {
        const bool was_open = std::find(open.begin(), open.end(), j) != open.end();
        const bool touches = polytope.consumption(j, i) > 0.0;
        if ((was_open || touches) && left[j] > 0) {
          int b = touches ? m[i] : 0;
          if (was_open)
            b += bound[std::find(open.begin(), open.end(), j) - open.begin()];
          cost *= b + 1;
        }
      }
      if (cost < best_cost) {
        best_cost = cost;
        best_pos = p;
      }
    }
    const std::size_t route = pending[best_pos];
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best_pos));
    const int mi = m[route];
    const auto used = polytope.resources_of(route);

    // Working layout: old open resources followed by newly opened ones.
    std::vector<std::size_t> work = open;
    std::vector<int> work_bound = bound;
    for (std::size_t j : used)
      if (std::find(work.begin(), work.end(), j) == work.end()) {
        work.push_back(j);
        work_bound.push_back(0);
      }
    std::vector<std::size_t> used_pos;
    for (std::size_t j : used) {
      const auto pos = static_cast<std::size_t>(std::find(work.begin(), work.end(), j) - work.begin());
      used_pos.push_back(pos);
      work_bound[pos] += mi;
    }
    for (std::size_t j : used)
      --routes_left[j];

    std::vector<std::size_t> next_open;
    std::vector<int> next_bound;
    std::vector<std::size_t> keep;  // positions in `work` that stay open
    for (std::size_t w = 0; w < work.size(); ++w)
      if (routes_left[work[w]] > 0) {
        keep.push_back(w);
        next_open.push_back(work[w]);
        next_bound.push_back(work_bound[w]);
      }
    std::vector<std::size_t> next_stride(next_bound.size());
    {
      std::size_t s = 1;
      for (std::size_t q = next_bound.size(); q-- > 0;) {
        next_stride[q] = s;
        s *= static_cast<std::size_t>(next_bound[q] + 1);
      }
    }
    // Stride of each work position inside the next layout (0 when it closes now).
    std::vector<std::size_t> work_stride(work.size(), 0);
    for (std::size_t q = 0; q < keep.size(); ++q)
      work_stride[keep[q]] = next_stride[q];

    std::vector<std::vector<double>> xpow(used.size(), std::vector<double>(static_cast<std::size_t>(mi) + 1, 1.0));
    for (std::size_t a = 0; a < used.size(); ++a) {
      const double x = polytope.consumption(used[a], route) / polytope.capacity(used[a]);
      for (int k = 1; k <= mi; ++k)
        xpow[a][static_cast<std::size_t>(k)] = xpow[a][static_cast<std::size_t>(k) - 1] * x;
    }
    std::vector<std::vector<int>> splits;
    compositions(mi, used.size(), splits);

    std::vector<double> next(layout_size(next_bound), 0.0);
    std::vector<int> tuple(open.size(), 0);
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
      if (idx > 0) {
        for (std::size_t q = open.size(); q-- > 0;) {
          if (++tuple[q] <= bound[q])
            break;
          tuple[q] = 0;
        }
      }
      const double v = values[idx];
      if (v == 0.0)
        continue;
      std::size_t base = 0;
      for (std::size_t q = 0; q < open.size(); ++q)
        base += static_cast<std::size_t>(tuple[q]) * work_stride[q];
      for (const auto& split : splits) {
        double w = v;
        std::size_t target = base;
        for (std::size_t a = 0; a < used.size(); ++a) {
          const std::size_t pos = used_pos[a];
          const int before = pos < open.size() ? tuple[pos] : 0;
          const int k = split[a];
          w *= binom[static_cast<std::size_t>(before + k)][static_cast<std::size_t>(k)] *
               xpow[a][static_cast<std::size_t>(k)];
          target += static_cast<std::size_t>(k) * work_stride[pos];
        }
        next[target] += w;
      }
    }

    const double peak = *std::max_element(next.begin(), next.end());
    if (!(peak > 0.0) || !std::isfinite(peak))
      throw ConsistencyError("Phi dynamic program lost all mass");
    for (double& x : next)
      x /= peak;
    log_scale += std::log(peak);

    values = std::move(next);
    open = std::move(next_open);
    bound = std::move(next_bound);
  }
  return log_scale + std::log(values.front());
}

double phi_dp(std::span<const int> m, const ResourcePolytope& polytope, const PhiOptions& options) {
  return std::exp(log_phi_dp(m, polytope, options));
}

std::vector<double> sfa_rates(std::span<const int> m, const ResourcePolytope& polytope, const PhiOptions& options) {
  check_occupancy(m, polytope);
  if (has_negative(m))
    throw DomainError("occupancy must be nonnegative");
  std::vector<double> out(m.size(), 0.0);
  const double base = log_phi_dp(m, polytope, options);
  std::vector<int> down(m.begin(), m.end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0)
      continue;
    --down[i];
    out[i] = std::exp(log_phi_dp(down, polytope, options) - base);
    ++down[i];
  }
  return out;
}

std::size_t SfaRateOracle::KeyHash::operator()(const std::vector<int>& v) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int x : v) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(x)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  }
  return h;
}

SfaRateOracle::SfaRateOracle(ResourcePolytope polytope, PhiOptions options, std::size_t cache_limit)
    : polytope_(std::move(polytope)), options_(options), cache_limit_(cache_limit) {}

double SfaRateOracle::log_phi(std::span<const int> m) const {
  if (has_negative(m))
    return kNegInf;
  std::vector<int> key(m.begin(), m.end());
  {
    std::shared_lock lock(mutex_);
    if (auto it = log_phi_.find(key); it != log_phi_.end())
      return it->second;
  }
  const double value = log_phi_dp(key, polytope_, options_);
  std::unique_lock lock(mutex_);
  if (log_phi_.size() >= cache_limit_)
    log_phi_.clear();
  log_phi_.emplace(std::move(key), value);
  return value;
}

std::vector<double> SfaRateOracle::rates(std::span<const int> m) const {
  std::vector<int> key(m.begin(), m.end());
  {
    std::shared_lock lock(mutex_);
    if (auto it = rates_.find(key); it != rates_.end())
      return it->second;
  }
  check_occupancy(m, polytope_);
  if (has_negative(m))
    throw DomainError("occupancy must be nonnegative");
  std::vector<double> out(m.size(), 0.0);
  const double base = log_phi(key);
  std::vector<int> down = key;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0)
      continue;
    --down[i];
    out[i] = std::exp(log_phi(down) - base);
    ++down[i];
  }
  std::unique_lock lock(mutex_);
  if (rates_.size() >= cache_limit_)
    rates_.clear();
  rates_.emplace(std::move(key), out);
  return out;
}

std::size_t SfaRateOracle::cached_states() const {
  std::shared_lock lock(mutex_);
  return log_phi_.size();
}

double phi_normalizer(std::span<const double> lambda, const ResourcePolytope& polytope) {
  const auto rho = resource_loads(lambda, polytope);
  double phi = 1.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (rho[j] >= 1.0)
      throw InstabilityError("resource " + std::to_string(j) + " has load " + std::to_string(rho[j]) + " >= 1");
    phi /= 1.0 - rho[j];
  }
  return phi;
}

double stationary_pi(std::span<const int> m, std::span<const double> lambda, const ResourcePolytope& polytope,
                     const PhiOptions& options) {
  const double norm = phi_normalizer(lambda, polytope);
  check_occupancy(m, polytope);
  if (has_negative(m))
    return 0.0;
  double log_weight = log_phi_dp(m, polytope, options) - std::log(norm);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0)
      continue;
    if (lambda[i] == 0.0)
      return 0.0;
    log_weight += m[i] * std::log(lambda[i]);
  }
  return std::exp(log_weight);
}

double multiclass_pi(const StageOccupancy& stage, std::span<const double> lambda,
                     const ResourcePolytope& polytope) {
  const double norm = phi_normalizer(lambda, polytope);
  const std::size_t nres = polytope.rank();
  double log_weight = -std::log(norm);
  std::vector<int> totals(nres, 0);
  for (const auto& p : stage.pairs) {
    if (p.resource >= nres || p.route >= polytope.n_routes() || polytope.consumption(p.resource, p.route) <= 0.0)
      throw DomainError("stage occupancy references a pair outside K");
    if (p.count < 0)
      throw DomainError("stage occupancy must be nonnegative");
    if (p.count == 0)
      continue;
    const double y = polytope.consumption(p.resource, p.route) * lambda[p.route] / polytope.capacity(p.resource);
    if (y == 0.0)
      return 0.0;
    totals[p.resource] += p.count;
    log_weight += p.count * std::log(y) - std::lgamma(p.count + 1.0);
  }
  for (int t : totals)
    log_weight += std::lgamma(t + 1.0);
  return std::exp(log_weight);
}

double resource_marginals(std::span<const int> levels, std::span<const double> rho_tilde) {
  if (levels.size() != rho_tilde.size())
    throw DimensionError("levels and loads differ in length");
  double p = 1.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!(rho_tilde[j] >= 0.0) || rho_tilde[j] >= 1.0)
      throw InstabilityError("resource load must lie in [0, 1)");
    if (levels[j] < 0)
      return 0.0;
    p *= (1.0 - rho_tilde[j]) * std::pow(rho_tilde[j], levels[j]);
  }
  return p;
}

double total_count_distribution(int total, std::span<const double> lambda, const ResourcePolytope& polytope) {
  const auto rho = resource_loads(lambda, polytope);
  if (total < 0)
    return 0.0;
  for (double r : rho)
    if (r >= 1.0)
      throw InstabilityError("resource load must be < 1");
  const auto len = static_cast<std::size_t>(total) + 1;
  std::vector<double> acc(len, 0.0);
  acc[0] = 1.0;
  for (double r : rho) {
    std::vector<double> pmf(len);
    double p = 1.0 - r;
    for (auto& v : pmf) {
      v = p;
      p *= r;
    }
    std::vector<double> conv(len, 0.0);
    for (std::size_t a = 0; a < len; ++a)
      for (std::size_t b = 0; a + b < len; ++b)
        conv[a + b] += acc[a] * pmf[b];
    acc = std::move(conv);
  }
  return acc.back();
}

double total_count_distribution_direct(int total, std::span<const double> lambda,
                                       const ResourcePolytope& polytope, const PhiOptions& options) {
  phi_normalizer(lambda, polytope);
  if (total < 0)
    return 0.0;
  std::vector<std::vector<int>> states;
  compositions(total, polytope.n_routes(), states);
  double sum = 0.0;
  for (const auto& m : states)
    sum += stationary_pi(m, lambda, polytope, options);
  return sum;
}

double mean_workload(std::span<const double> rho_tilde) {
  double s = 0.0;
  for (double r : rho_tilde) {
    if (!(r >= 0.0) || r >= 1.0)
      throw InstabilityError("resource load must lie in [0, 1)");
    s += r / (1.0 - r);
  }
  return 0.5 * s;
}

double tail_exponent(double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw DomainError("tail exponent needs 0 < rho < 1, got " + std::to_string(rho));
  return convex_positive_root([rho](double t) { return rho * std::expm1(t) - t; });
}

ExponentBounds lower_bound_exponents(std::span<const double> lambda, const ResourcePolytope& polytope) {
  const auto rho = resource_loads(lambda, polytope);
  ExponentBounds out;
  out.min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (rho[j] >= 1.0)
      throw InstabilityError("resource " + std::to_string(j) + " is overloaded");
    double theta = std::numeric_limits<double>::infinity();
    if (rho[j] > 0.0) {
      const double cap = polytope.capacity(j);
      theta = convex_positive_root([&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i)
          if (polytope.consumption(j, i) > 0.0)
            s += lambda[i] * std::expm1(polytope.consumption(j, i) / cap * t);
        return s - t;
      });
    }
    out.per_resource.push_back(theta);
    out.min = std::min(out.min, theta);
  }
  return out;
}

double md1_lower_bound(int ports, double rho) {
  if (ports < 1)
    throw DomainError("port count must be positive");
  if (!(rho >= 0.0) || rho >= 1.0)
    throw DomainError("M/D/1 bound needs 0 <= rho < 1");
  return ports * rho / (2.0 * (1.0 - rho));
}

ProductFormSummary summarize(std::span<const double> lambda, const ResourcePolytope& polytope) {
  ProductFormSummary s;
  s.rho_tilde = resource_loads(lambda, polytope);
  s.phi_norm = phi_normalizer(lambda, polytope);
  s.mean_workload = mean_workload(s.rho_tilde);
  const double rho = *std::max_element(s.rho_tilde.begin(), s.rho_tilde.end());
  s.theta_star = rho > 0.0 ? tail_exponent(rho) : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace switchlab
