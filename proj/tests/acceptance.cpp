// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all ten)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "switchlab/bandwidth_network.hpp"
#include "switchlab/coupled.hpp"
#include "switchlab/decomposition.hpp"
#include "switchlab/experiment.hpp"
#include "switchlab/sfa.hpp"
#include "switchlab/topology.hpp"

using namespace switchlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_close(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

bool report(int id, bool pass, const std::string& text) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void states_of_total(int total, std::size_t n, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == n) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, total);
}

ResourcePolytope random_polytope(std::mt19937_64& rng, std::size_t n, std::size_t j) {
  std::uniform_real_distribution<double> val(0.1, 1.0);
  std::bernoulli_distribution coin(0.4);
  std::vector<std::vector<double>> r(j, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    r[i % j][i] = val(rng);
    for (std::size_t a = 0; a < j; ++a)
      if (coin(rng))
        r[a][i] = val(rng);
  }
  std::vector<double> c(j);
  for (auto& x : c)
    x = 0.5 + val(rng);
  return ResourcePolytope(r, c);
}

TraceSummary emulate(const Topology& t, double rho, std::int64_t horizon, std::uint64_t seed,
                     Policy policy = Policy::emulation, std::shared_ptr<const SfaRateOracle> oracle = nullptr) {
  CoupledConfig c;
  c.lambda = uniform_load_rates(t, rho);
  c.horizon = horizon;
  c.seed = seed;
  c.policy = policy;
  c.abort_on_violation = false;  // count every violation instead of stopping at the first
  c.oracle = std::move(oracle);
  return run_coupled(t, c);
}

double batch_stderr(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs)
    m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

// 1. Phi dynamic program against brute-force enumeration.
bool criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(0, 4);
  int cases = 0;
  double worst = 0.0;
  while (cases < 200) {
    const std::size_t n = cases % 5 == 4 ? 4 : 1 + static_cast<std::size_t>(cases % 4);
    const std::size_t j = 1 + static_cast<std::size_t>((cases / 5) % 3);
    // Every fifth case is the 2x2 switch shape, which has a closed form.
    auto p = cases % 5 == 4 ? iq_switch(2).polytope : random_polytope(rng, n, j);
    if (p.pair_count() > kBruteForceMaxPairs)
      continue;
    std::vector<int> m(n);
    int total = 0;
    for (auto& x : m) {
      x = count(rng);
      total += x;
    }
    if (total > 8)
      continue;
    PhiOptions plain;
    plain.closed_forms = false;
    const double b = phi_bruteforce(m, p);
    worst = std::max(worst, std::fabs(phi_dp(m, p) - b) / b);
    worst = std::max(worst, std::fabs(phi_dp(m, p, plain) - b) / b);
    ++cases;
  }
  const double secs = seconds_since(t0);
  return report(1, worst <= 1e-9 && secs < 60.0,
                fmt("phi_dp (closed forms on and off) vs phi_bruteforce on %d random cases, worst rel err %.2e (tol 1e-9), %.2f s (limit 60 s)",
                    cases, worst, secs));
}

// 2. Detailed balance on the two-route, two-resource network.
bool criterion2() {
  auto t = two_route_network();
  std::vector<double> lambda{0.2, 0.3};
  double worst = 0.0;
  int checks = 0;
  for (int l = 1; l <= 30; ++l) {
    std::vector<std::vector<int>> states;
    states_of_total(l, 2, states);
    for (const auto& m : states) {
      const auto phi = sfa_rates(m, t.polytope);
      for (std::size_t i = 0; i < 2; ++i) {
        if (m[i] == 0)
          continue;
        auto down = m;
        --down[i];
        const double lhs = stationary_pi(m, lambda, t.polytope) * phi[i];
        const double rhs = stationary_pi(down, lambda, t.polytope) * lambda[i];
        worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
        ++checks;
      }
    }
  }
  return report(2, worst <= 1e-8,
                fmt("pi(m) phi_i(m) = pi(m-e_i) lambda_i on %d (m, i) pairs with |m| <= 30, worst rel err %.2e (tol 1e-8)",
                    checks, worst));
}

// 3. Multiclass marginals and total-count law from brute-force sums.
bool criterion3() {
  auto t = iq_switch(2);
  const auto& p = t.polytope;
  std::vector<double> lambda{0.3, 0.15, 0.2, 0.25};
  const auto rho = resource_loads(lambda, p);
  const double norm = phi_normalizer(lambda, p);
  double worst_total = 0.0, worst_mc = 0.0;

  for (int l = 0; l <= 6; ++l) {
    std::vector<std::vector<int>> states;
    states_of_total(l, 4, states);
    double sum = 0.0;
    for (const auto& m : states) {
      double w = phi_bruteforce(m, p) / norm;
      for (std::size_t i = 0; i < 4; ++i)
        w *= std::pow(lambda[i], m[i]);
      sum += w;
    }
    // Independent oracle: convolve the per-resource geometric pmfs by hand.
    std::vector<double> conv(static_cast<std::size_t>(l) + 1, 0.0);
    conv[0] = 1.0;
    for (double r : rho) {
      std::vector<double> next(conv.size(), 0.0);
      for (std::size_t a = 0; a < conv.size(); ++a)
        for (std::size_t b = 0; a + b < conv.size(); ++b)
          next[a + b] += conv[a] * oracle::geometric_pmf(r, static_cast<int>(b));
      conv = next;
    }
    worst_total = std::max(worst_total, std::fabs(sum - conv.back()) / conv.back());
    worst_total = std::max(worst_total, std::fabs(total_count_distribution(l, lambda, p) - conv.back()) / conv.back());
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i : p.routes_of(j))
      pairs.emplace_back(j, i);
  for (int total = 0; total <= 6; ++total) {
    std::vector<std::vector<int>> levels_list;
    states_of_total(total, 4, levels_list);
    for (const auto& levels : levels_list) {
      StageOccupancy stage;
      for (auto [j, i] : pairs)
        stage.pairs.push_back({j, i, 0});
      double sum = 0.0;
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == stage.pairs.size()) {
          if (stage.resource_totals(4) == levels)
            sum += multiclass_pi(stage, lambda, p);
          return;
        }
        for (int c = 0; c <= levels[stage.pairs[k].resource]; ++c) {
          stage.pairs[k].count = c;
          rec(k + 1);
        }
      };
      rec(0);
      double expect = 1.0;
      for (std::size_t j = 0; j < 4; ++j)
        expect *= oracle::geometric_pmf(rho[j], levels[j]);
      worst_mc = std::max(worst_mc, std::fabs(sum - expect) / expect);
    }
  }
  return report(3, worst_total <= 1e-8 && worst_mc <= 1e-8,
                fmt("sum over |m|=L of pi vs geometric convolution (L<=6): worst rel err %.2e; "
                    "sum over V(L) of multiclass pi vs geometric product (|L|<=6): worst rel err %.2e (tol 1e-8)",
                    worst_total, worst_mc));
}

// 4. The virtual network alone reaches the product-form law.
bool criterion4() {
  const auto t0 = Clock::now();
  auto t = two_route_network();
  std::vector<double> lambda{0.2, 0.3};
  auto oracle = std::make_shared<const SfaRateOracle>(t.polytope);
  const auto st = simulate_bandwidth_network(oracle, lambda, 1e6, 1e4, 4);
  const auto law = st.total_count_law();
  double tv = 0.0, covered = 0.0;
  for (std::size_t l = 0; l < law.size(); ++l) {
    const double q = total_count_distribution(static_cast<int>(l), lambda, t.polytope);
    tv += std::fabs(law[l] - q);
    covered += q;
  }
  tv = 0.5 * (tv + (1.0 - covered));
  const double target = 0.5 * (1.0 + 3.0 / 7.0);
  const double rel = std::fabs(st.mean_workload() - target) / target;
  return report(4, tv <= 0.02 && rel <= 0.05,
                fmt("rho~=(0.5,0.3), %.0f time units: TV distance %.4f (tol 0.02); mean workload %.4f vs %.4f, "
                    "rel err %.4f (tol 0.05); %.1f s",
                    st.elapsed, tv, st.mean_workload(), target, rel, seconds_since(t0)));
}

// 5 and 6 share their runs.
std::map<double, TraceSummary>& iq2_runs() {
  static std::map<double, TraceSummary> runs;
  if (runs.empty()) {
    auto t = iq_switch(2);
    auto oracle = std::make_shared<const SfaRateOracle>(t.polytope);
    for (double rho : {0.5, 0.8, 0.9})
      runs.emplace(rho, emulate(t, rho, 1000000, 500 + static_cast<std::uint64_t>(rho * 10), Policy::emulation, oracle));
  }
  return runs;
}

bool criterion5() {
  bool pass = true;
  std::string text = "iq:2, 1e6 slots:";
  for (const auto& [rho, s] : iq2_runs()) {
    pass = pass && s.violations.total() == 0;
    text += fmt(" rho=%.1f violations=%lld (max rho(D)=%.3f <= 6, max sum D=%.3f <= 12, idle=%lld)", rho,
                static_cast<long long>(s.violations.total()), s.max_tracking_load, s.max_tracking_mass,
                static_cast<long long>(s.final_state.cum_idle[0] + s.final_state.cum_idle[1] +
                                       s.final_state.cum_idle[2] + s.final_state.cum_idle[3]));
    for (const auto& [name, count] : s.violations.entries())
      if (count)
        text += " " + name + "=" + std::to_string(count);
  }
  return report(5, pass, text);
}

bool criterion6() {
  bool pass = true;
  std::string text = "iq:2 mean total queue vs 2rho/(1-rho)+12:";
  for (const auto& [rho, s] : iq2_runs()) {
    const double bound = 2.0 * rho / (1.0 - rho) + 12.0;
    const double se = batch_stderr(s.batch_means);
    pass = pass && s.mean_queue <= bound + 3.0 * se;
    text += fmt(" rho=%.1f Q=%.3f+-%.3f bound=%.2f;", rho, s.mean_queue, se, bound);
  }
  return report(6, pass, text);
}

// 7. Tail slope against -theta*.
bool criterion7() {
  const double rho = 0.7;
  const double theta = tail_exponent(rho);
  const double check = oracle::newton_tail_exponent(rho);
  bool pass = std::fabs(rho * std::expm1(theta) - theta) < 1e-10 && rel_close(theta, check, 1e-9);
  std::string text = fmt("theta*(0.7)=%.10f (root residual %.1e);", theta, std::fabs(rho * std::expm1(theta) - theta));
  struct Case {
    const char* name;
    std::int64_t horizon;
  };
  for (const Case& c : {Case{"single", 2000000}, Case{"iq:2", 20000000}}) {
    const auto t0 = Clock::now();
    const auto s = emulate(make_topology(c.name), rho, c.horizon, 77);
    const auto fit = estimate_tail_exponent(s.queue_histogram);
    const double rel = std::fabs(fit.slope + theta) / theta;
    pass = pass && rel <= 0.15;
    text += fmt(" %s %lld slots: slope %.4f, rel err %.3f (tol 0.15), window [%lld, %lld], %.0f s;", c.name,
                static_cast<long long>(c.horizon), fit.slope, rel, static_cast<long long>(fit.window_low),
                static_cast<long long>(fit.window_high), seconds_since(t0));
  }
  return report(7, pass, text);
}

// 8. (1 - rho) Q sandwich near saturation.
bool criterion8() {
  ExperimentConfig cfg;
  cfg.topology = "iq:2";
  cfg.rho = 0.95;
  cfg.horizon = 2000000;
  cfg.replications = 4;
  cfg.seed = 808;
  cfg.abort_on_violation = false;
  const auto t0 = Clock::now();
  const auto r = run_experiment(cfg);
  const double n = 2.0, slack = 0.05;
  const double lo = n / 2.0, hi = n + slack * (n * n + 2.0) * n;
  const double v = slack * r.mean_queue, se = slack * r.stderr_queue;
  const bool pass = v >= lo - 3.0 * se && v <= hi + 3.0 * se;
  return report(8, pass,
                fmt("iq:2 rho=0.95, 4 x 2e6 slots: (1-rho)Q = %.4f +- %.4f in [%.2f, %.2f] (3 stderr slack), "
                    "violations=%lld, %.0f s",
                    v, se, lo, hi, static_cast<long long>(r.violations.total()), seconds_since(t0)));
}

// 9. Max-weight against the M/D/1 lower bound, side by side with the emulation policy.
bool criterion9() {
  auto t = iq_switch(2);
  bool pass = true;
  std::string text = "iq:2 MW-1 vs n rho/(2(1-rho)):";
  for (const auto& [rho, emul] : iq2_runs()) {
    const auto mw = emulate(t, rho, 1000000, 900 + static_cast<std::uint64_t>(rho * 10), Policy::max_weight);
    const double lower = md1_lower_bound(2, rho);
    const double se = batch_stderr(mw.batch_means);
    pass = pass && mw.mean_queue >= lower - 3.0 * se;
    text += fmt(" rho=%.2f MW=%.3f+-%.3f EMUL=%.3f lower=%.3f;", rho, mw.mean_queue, se, emul.mean_queue, lower);
  }
  ExperimentConfig cfg;
  cfg.topology = "iq:2";
  cfg.rho = 0.95;
  cfg.horizon = 2000000;
  cfg.replications = 4;
  cfg.seed = 808;
  cfg.policy = Policy::max_weight;
  const auto r = run_experiment(cfg);
  const double lower = md1_lower_bound(2, 0.95);
  pass = pass && r.mean_queue >= lower - 3.0 * r.stderr_queue;
  text += fmt(" rho=0.95 (4 x 2e6) MW=%.3f+-%.3f lower=%.3f", r.mean_queue, r.stderr_queue, lower);
  return report(9, pass, text);
}

// 10. Decomposition kernel on random inputs.
bool criterion10() {
  std::mt19937_64 rng(1010);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0, big_cases = 0;
  double worst_moment = 0.0, worst_total = 0.0;
  std::size_t worst_support_excess = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 4);
    std::vector<Schedule> gens;
    std::vector<std::vector<int>> raw;
    for (int g = 0; g < 3; ++g) {
      std::vector<int> v(n);
      for (auto& x : v)
        x = coin(rng);
      gens.push_back(Schedule::from_ints(v));
    }
    auto set = monotone_close(gens, n);
    for (const auto& s : set.schedules())
      raw.emplace_back(s.entries().begin(), s.entries().end());
    const double scale = 2.0 * static_cast<double>(n + 1) * u(rng);
    std::vector<double> target(n);
    for (auto& x : target)
      x = scale * u(rng);

    const auto primal = solve_primal(target, set);
    const auto tight = tighten(primal, target);
    const auto reduced = caratheodory_reduce(tight);
    const double lp = oracle::covering_lp_by_vertices(raw, target);
    for (const auto* dec : {&tight, &reduced}) {
      const auto mom = dec->moment(n);
      for (std::size_t i = 0; i < n; ++i)
        worst_moment = std::max(worst_moment, std::fabs(mom[i] - target[i]));
      worst_total = std::max(worst_total, std::fabs(dec->total() - lp));
    }
    if (reduced.support() > n + 1) {
      worst_support_excess = std::max(worst_support_excess, reduced.support() - (n + 1));
      ++failures;
    }
    if (lp >= static_cast<double>(n + 1)) {
      ++big_cases;
      bool atom = false;
      for (const auto& a : reduced.atoms)
        atom = atom || a.coefficient >= 1.0;
      if (!atom)
        ++failures;
    }
  }
  const bool pass = failures == 0 && worst_moment <= 1e-9 && worst_total <= 1e-9;
  return report(10, pass,
                fmt("500 random (target, set) pairs: worst |moment - target| %.2e, worst |total - LP| %.2e "
                    "(tol 1e-9), support excess %zu, %d cases with rho >= N+1 all holding an atom >= 1: %s",
                    worst_moment, worst_total, worst_support_excess, big_cases, failures == 0 ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<bool()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> pick;
  for (int a = 1; a < argc; ++a)
    pick.push_back(std::atoi(argv[a]));
  if (pick.empty())
    for (int k = 1; k <= 10; ++k)
      pick.push_back(k);
  bool ok = true;
  for (int k : pick) {
    if (k < 1 || k > 10) {
      std::printf("unknown criterion %d\n", k);
      return 2;
    }
    try {
      ok = all[static_cast<std::size_t>(k - 1)]() && ok;
    } catch (const std::exception& e) {
      ok = report(k, false, std::string("exception: ") + e.what()) && ok;
    }
  }
  return ok ? 0 : 1;
}
