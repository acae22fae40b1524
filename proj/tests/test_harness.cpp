#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "switchlab/errors.hpp"
#include "switchlab/experiment.hpp"
#include "switchlab/sfa.hpp"

using namespace switchlab;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Verdict& find_verdict(const ExperimentReport& r, const std::string& id) {
  for (const auto& v : r.verdicts)
    if (v.id == id)
      return v;
  FAIL("missing verdict " << id);
  return r.verdicts.front();
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = config_from_json(json::parse(R"({"topology":"iq:3","rho":0.9,"policy":"mw","mw_alpha":2,
                                            "horizon":5000,"seed":9,"replications":3})"));
  CHECK(c.topology == "iq:3");
  CHECK(*c.rho == doctest::Approx(0.9));
  CHECK(c.policy == Policy::max_weight);
  CHECK(c.mw_alpha == 2.0);
  CHECK(c.horizon == 5000);
  CHECK(c.seed == 9);
  CHECK(c.replications == 3);

  auto round = config_from_json(to_json(c));
  CHECK(round.topology == c.topology);
  CHECK(round.horizon == c.horizon);
  CHECK(round.policy == c.policy);

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"horizon":"long"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"colour":"red"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"policy":"fifo"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse("[1,2]")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/switchlab.json"), ConfigError);
}

TEST_CASE("uniform rates") {
  auto r = uniform_switch_rates(2, 0.8);
  REQUIRE(r.size() == 4);
  for (double x : r.rates)
    CHECK(x == doctest::Approx(0.4));

  auto t = make_topology("iq:3");
  auto l = uniform_load_rates(t, 0.6);
  CHECK(load(l, t.polytope) == doctest::Approx(0.6));
}

TEST_CASE("tail fit on geometric samples") {
  std::mt19937_64 rng(5);
  std::geometric_distribution<std::int64_t> g(0.5);
  std::vector<std::int64_t> xs(200000);
  for (auto& x : xs)
    x = g(rng);
  auto fit = estimate_tail_exponent_from_samples(xs);
  CHECK(fit.slope == doctest::Approx(std::log(0.5)).epsilon(0.05));
  CHECK(fit.window_low <= fit.window_high);
  CHECK(fit.samples == 200000);

  std::vector<std::int64_t> flat(20000, 3);
  CHECK_THROWS_AS(estimate_tail_exponent_from_samples(flat), InsufficientData);
  std::vector<std::int64_t> few(100, 1);
  CHECK_THROWS_AS(estimate_tail_exponent_from_samples(few), InsufficientData);
}

TEST_CASE("analytics") {
  auto t = make_topology("iq:2");
  auto a = analyze(t, uniform_switch_rates(2, 0.8).rates);
  CHECK(a.load == doctest::Approx(0.8));
  CHECK(a.mean_workload == doctest::Approx(8.0));
  CHECK(a.mean_bound == doctest::Approx(20.0));
  REQUIRE(a.md1_bound.has_value());
  CHECK(*a.md1_bound == doctest::Approx(4.0));
  CHECK(a.theta_star == doctest::Approx(tail_exponent(0.8)));

  auto t3 = make_topology("iq:3");
  auto a3 = analyze(t3, uniform_switch_rates(3, 0.9).rates);
  CHECK(*a3.md1_bound == doctest::Approx(13.5));

  std::ostringstream out;
  write_analytics_csv(out, t, uniform_switch_rates(2, 0.8).rates);
  const auto text = out.str();
  CHECK(text.rfind("quantity,parameters,value", 0) == 0);
  CHECK(text.find("theta") != std::string::npos);
}

TEST_CASE("same seed gives identical output") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "switchlab_harness_test";
  fs::create_directories(dir);
  ExperimentConfig c;
  c.topology = "iq:2";
  c.rho = 0.7;
  c.horizon = 20000;
  c.seed = 42;
  c.csv_path = (dir / "a.csv").string();
  auto r1 = run_experiment(c);
  c.csv_path = (dir / "b.csv").string();
  auto r2 = run_experiment(c);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv").rfind("slot,sumQ,sumW,rhoD,policy", 0) == 0);
  CHECK(summary_json(r1).dump() == summary_json(r2).dump());
  fs::remove_all(dir);
}

TEST_CASE("replications and verdicts") {
  ExperimentConfig c;
  c.topology = "iq:2";
  c.rho = 0.8;
  c.horizon = 40000;
  c.replications = 4;
  c.seed = 3;
  auto r = run_experiment(c);
  REQUIRE(r.replications.size() == 4);

  double m = 0.0;
  for (const auto& s : r.replications)
    m += s.mean_queue;
  m /= 4.0;
  double ss = 0.0;
  for (const auto& s : r.replications)
    ss += (s.mean_queue - m) * (s.mean_queue - m);
  CHECK(r.mean_queue == doctest::Approx(m));
  CHECK(r.stderr_queue == doctest::Approx(std::sqrt(ss / 3.0 / 4.0)));

  const auto& a = find_verdict(r, "a");
  CHECK(a.analytic == doctest::Approx(20.0));
  CHECK(a.pass);
  CHECK(find_verdict(r, "b").pass);
  CHECK(find_verdict(r, "d").pass);
  CHECK(r.violations.total() == 0);
  // Queue lengths dominate the virtual workload.
  CHECK(r.mean_queue >= r.mean_workload);
}

TEST_CASE("max-weight reports no workload") {
  ExperimentConfig c;
  c.topology = "iq:2";
  c.rho = 0.5;
  c.horizon = 10000;
  c.policy = Policy::max_weight;
  auto r = run_experiment(c);
  CHECK(std::isnan(r.replications.front().mean_workload));
  CHECK(r.mean_queue > 0.0);
}
