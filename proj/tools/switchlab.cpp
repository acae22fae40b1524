// switchlab: run, verify and inspect switched-network experiments.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "switchlab/errors.hpp"
#include "switchlab/experiment.hpp"

using namespace switchlab;

namespace {

struct Overrides {
  std::string config;
  std::string topology;
  double rho = 0.0;
  std::vector<double> lambda;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  std::string policy;
  double mw_alpha = 0.0;
  int replications = 0;
  std::string trace;
  std::string csv;
  std::string summary;
  std::string ccdf;
  CLI::Option* seed_opt = nullptr;
};

void add_run_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--topology", o.topology, "iq:<n>, pooled:<n>, parallel:<n>, single, pair, "
                                            "independent-set:<file>, file:<path>");
  app->add_option("--rho", o.rho, "uniform load target");
  app->add_option("--lambda", o.lambda, "explicit arrival rates")->delimiter(',');
  o.seed_opt = app->add_option("--seed", o.seed, "base seed");
  app->add_option("--horizon", o.horizon, "slots per replication");
  app->add_option("--policy", o.policy, "emul or mw")->check(CLI::IsMember({"emul", "mw"}));
  app->add_option("--mw-alpha", o.mw_alpha, "MW exponent");
  app->add_option("--replications", o.replications, "independent replications");
  app->add_option("--trace", o.trace, "event trace of the virtual network (CSV)");
  app->add_option("--csv", o.csv, "per-slot CSV output");
  app->add_option("--summary", o.summary, "summary JSON output");
  app->add_option("--ccdf", o.ccdf, "ccdf of the total queue (CSV)");
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.topology.empty())
    c.topology = o.topology;
  if (o.rho > 0.0) {
    c.rho = o.rho;
    c.lambda.clear();
  }
  if (!o.lambda.empty()) {
    c.lambda = o.lambda;
    c.rho.reset();
  }
  if (*o.seed_opt)
    c.seed = o.seed;
  if (o.horizon > 0)
    c.horizon = o.horizon;
  if (!o.policy.empty())
    c.policy = policy_from_string(o.policy);
  if (o.mw_alpha > 0.0)
    c.mw_alpha = o.mw_alpha;
  if (o.replications > 0)
    c.replications = o.replications;
  if (!o.trace.empty())
    c.trace_path = o.trace;
  if (!o.csv.empty())
    c.csv_path = o.csv;
  if (!o.summary.empty())
    c.summary_path = o.summary;
  if (!o.ccdf.empty())
    c.ccdf_path = o.ccdf;
  if (c.lambda.empty() && !c.rho)
    throw ConfigError("give --rho or --lambda (or set them in the config)");
  return c;
}

void print_report(const ExperimentReport& r) {
  std::cout << std::setprecision(6) << "topology " << r.topology.name << ", policy " << to_string(r.config.policy)
            << ", load " << r.analytics.load << ", " << r.replications.size() << " x " << r.config.horizon
            << " slots\n";
  std::cout << "mean total queue " << r.mean_queue << " +- " << r.stderr_queue;
  if (!std::isnan(r.mean_workload))
    std::cout << ", mean total workload " << r.mean_workload << " (analytic " << r.analytics.mean_workload << ")";
  std::cout << '\n';
  double wall = 0.0;
  for (const auto& s : r.replications)
    wall += s.wall_seconds;
  std::cerr << "simulation time " << wall << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"switchlab: switched-network scheduling laboratory"};
  app.require_subcommand(1);

  Overrides run_opts, verify_opts;
  auto* run = app.add_subcommand("run", "simulate and write outputs");
  add_run_options(run, run_opts);
  auto* verify = app.add_subcommand("verify", "simulate and check the verdicts (no per-slot CSV)");
  add_run_options(verify, verify_opts);

  std::string an_topology;
  double an_rho = 0.0;
  std::vector<double> an_lambda;
  std::string an_out;
  auto* analytics = app.add_subcommand("analytics", "closed-form quantities as CSV rows");
  analytics->add_option("--topology", an_topology, "topology spec")->required();
  analytics->add_option("--rho", an_rho, "uniform load target");
  analytics->add_option("--lambda", an_lambda, "explicit arrival rates")->delimiter(',');
  analytics->add_option("--out", an_out, "write rows here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || verify->parsed()) {
      auto config = build_config(run->parsed() ? run_opts : verify_opts);
      if (verify->parsed())
        config.csv_path.clear();
      auto report = run_experiment(config);
      print_report(report);
      write_verdicts(std::cout, report.verdicts);
      return report.all_pass() ? 0 : 1;
    }
    auto topo = make_topology(an_topology);
    std::vector<double> lambda = an_lambda;
    if (lambda.empty()) {
      if (!(an_rho > 0.0))
        throw ConfigError("give --rho or --lambda");
      lambda = uniform_load_rates(topo, an_rho);
    }
    if (an_out.empty()) {
      write_analytics_csv(std::cout, topo, lambda);
    } else {
      std::ofstream out(an_out);
      if (!out)
        throw ConfigError("cannot write " + an_out);
      write_analytics_csv(out, topo, lambda);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
