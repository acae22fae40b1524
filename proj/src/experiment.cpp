#include "switchlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "switchlab/errors.hpp"
#include "switchlab/sfa.hpp"

namespace switchlab {

using nlohmann::json;

namespace {

template <class T>
T field(const json& doc, const char* name, const T& fallback) {
  if (!doc.contains(name))
    return fallback;
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + name + "' has the wrong type");
  }
}

std::string replication_path(const std::string& path, int r) {
  if (r == 0)
    return path;
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + ".rep" + std::to_string(r) + p.extension().string())).string();
}

std::uint64_t replication_seed(std::uint64_t seed, int r) {
  return seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r);
}

double sample_stderr(const std::vector<double>& xs) {
  if (xs.size() < 2)
    return 0.0;
  double mean = 0.0;
  for (double x : xs)
    mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path);
  return out;
}

bool uniform_ports(const Topology& t, const std::vector<double>& rho_tilde) {
  if (t.ports == 0 || rho_tilde.empty())
    return false;
  for (double r : rho_tilde)
    if (std::fabs(r - rho_tilde.front()) > 1e-12)
      return false;
  return true;
}

Verdict make_verdict(std::string id, std::string description, double simulated, double se, double analytic,
                     double tolerance) {
  Verdict v;
  v.id = std::move(id);
  v.description = std::move(description);
  v.simulated = simulated;
  v.stderr_ = se;
  v.analytic = analytic;
  v.tolerance = tolerance;
  return v;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  static const std::set<std::string> known{"topology", "lambda",  "rho",       "policy",          "mw_alpha",
                                           "horizon",  "warmup_fraction",    "seed",     "replications",
                                           "threads",  "abort_on_violation", "tail_tolerance",  "csv",
                                           "csv_stride", "summary", "ccdf",     "trace"};
  if (!doc.is_object())
    throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!known.count(key))
      throw ConfigError("unknown field '" + key + "'");

  ExperimentConfig c;
  c.topology = field(doc, "topology", c.topology);
  c.lambda = field(doc, "lambda", c.lambda);
  if (doc.contains("rho"))
    c.rho = field(doc, "rho", 0.0);
  if (!c.lambda.empty() && c.rho)
    throw ConfigError("give either 'lambda' or 'rho', not both");
  c.policy = policy_from_string(field(doc, "policy", std::string("emul")));
  c.mw_alpha = field(doc, "mw_alpha", c.mw_alpha);
  c.horizon = field(doc, "horizon", c.horizon);
  c.warmup_fraction = field(doc, "warmup_fraction", c.warmup_fraction);
  c.seed = field(doc, "seed", c.seed);
  c.replications = field(doc, "replications", c.replications);
  c.threads = field(doc, "threads", c.threads);
  c.abort_on_violation = field(doc, "abort_on_violation", c.abort_on_violation);
  c.tail_tolerance = field(doc, "tail_tolerance", c.tail_tolerance);
  c.csv_path = field(doc, "csv", c.csv_path);
  c.csv_stride = field(doc, "csv_stride", c.csv_stride);
  c.summary_path = field(doc, "summary", c.summary_path);
  c.ccdf_path = field(doc, "ccdf", c.ccdf_path);
  c.trace_path = field(doc, "trace", c.trace_path);

  if (c.rho && !(*c.rho > 0.0))
    throw ConfigError("field 'rho' must be positive");
  if (!(c.mw_alpha > 0.0))
    throw ConfigError("field 'mw_alpha' must be positive");
  if (c.horizon <= 0)
    throw ConfigError("field 'horizon' must be positive");
  if (!(c.warmup_fraction >= 0.0 && c.warmup_fraction < 1.0))
    throw ConfigError("field 'warmup_fraction' must lie in [0, 1)");
  if (c.replications < 1)
    throw ConfigError("field 'replications' must be at least 1");
  if (c.threads < 0)
    throw ConfigError("field 'threads' must be nonnegative");
  if (c.csv_stride < 1)
    throw ConfigError("field 'csv_stride' must be at least 1");
  if (!(c.tail_tolerance > 0.0))
    throw ConfigError("field 'tail_tolerance' must be positive");
  for (double v : c.lambda)
    if (!(v >= 0.0))
      throw ConfigError("field 'lambda' must hold nonnegative numbers");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(doc);
}

json to_json(const ExperimentConfig& c) {
  json doc{{"topology", c.topology},
           {"policy", to_string(c.policy)},
           {"mw_alpha", c.mw_alpha},
           {"horizon", c.horizon},
           {"warmup_fraction", c.warmup_fraction},
           {"seed", c.seed},
           {"replications", c.replications},
           {"abort_on_violation", c.abort_on_violation},
           {"tail_tolerance", c.tail_tolerance},
           {"csv_stride", c.csv_stride}};
  if (c.rho)
    doc["rho"] = *c.rho;
  else
    doc["lambda"] = c.lambda;
  return doc;
}

RateVector uniform_switch_rates(int n, double rho) {
  if (n < 1)
    throw DomainError("switch needs at least one port");
  if (!(rho > 0.0 && rho < 1.0))
    throw DomainError("uniform switch load must lie in (0, 1)");
  return RateVector{std::vector<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), rho / n)};
}

std::vector<double> uniform_load_rates(const Topology& topology, double rho) {
  if (!(rho > 0.0))
    throw DomainError("load must be positive");
  if (topology.ports > 0 && rho < 1.0)
    return uniform_switch_rates(topology.ports, rho).rates;
  std::vector<double> ones(topology.n_queues(), 1.0);
  const double base = load(ones, topology.polytope);
  for (double& v : ones)
    v = rho / base;
  return ones;
}

TailFit estimate_tail_exponent(std::span<const std::int64_t> histogram) {
  std::int64_t total = 0;
  for (auto c : histogram)
    total += c;
  if (total < kMinTailSamples)
    throw InsufficientData("tail fit needs at least " + std::to_string(kMinTailSamples) + " samples, got " +
                           std::to_string(total));
  // exceed[l] = #{X >= l}
  std::vector<std::int64_t> exceed(histogram.size() + 1, 0);
  for (std::size_t l = histogram.size(); l-- > 0;)
    exceed[l] = exceed[l + 1] + histogram[l];

  std::int64_t low = 0, cum = 0;
  for (std::size_t l = 0; l < histogram.size(); ++l) {
    cum += histogram[l];
    if (2 * cum >= total) {
      low = static_cast<std::int64_t>(l);
      break;
    }
  }
  std::int64_t high = -1;
  for (std::size_t l = 0; l < histogram.size(); ++l)
    if (exceed[l] >= kMinTailExceedances)
      high = static_cast<std::int64_t>(l);
  if (high - low < 1)
    throw InsufficientData("tail window [" + std::to_string(low) + ", " + std::to_string(high) +
                           "] holds fewer than two points");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double k = static_cast<double>(high - low + 1);
  for (std::int64_t l = low; l <= high; ++l) {
    const double x = static_cast<double>(l);
    const double y = std::log(static_cast<double>(exceed[static_cast<std::size_t>(l)]) / static_cast<double>(total));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  TailFit fit;
  fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  fit.window_low = low;
  fit.window_high = high;
  fit.samples = total;
  return fit;
}

TailFit estimate_tail_exponent_from_samples(std::span<const std::int64_t> samples) {
  std::vector<std::int64_t> hist;
  for (auto s : samples) {
    if (s < 0)
      throw DomainError("tail samples must be nonnegative");
    if (hist.size() <= static_cast<std::size_t>(s))
      hist.resize(static_cast<std::size_t>(s) + 1, 0);
    ++hist[static_cast<std::size_t>(s)];
  }
  return estimate_tail_exponent(hist);
}

Analytics analyze(const Topology& topology, std::span<const double> lambda) {
  Analytics a;
  a.rho_tilde = resource_loads(lambda, topology.polytope);
  a.load = *std::max_element(a.rho_tilde.begin(), a.rho_tilde.end());
  if (a.load >= 1.0)
    throw InstabilityError("load " + std::to_string(a.load) + " >= 1 has no stationary regime");
  a.mean_workload = mean_workload(a.rho_tilde);
  a.theta_star = a.load > 0.0 ? tail_exponent(a.load) : std::numeric_limits<double>::infinity();
  a.lower_exponent = lower_bound_exponents(lambda, topology.polytope).min;
  const double n = static_cast<double>(topology.n_queues());
  a.mean_bound = a.mean_workload + topology.k_max() * (n + 2.0);
  if (uniform_ports(topology, a.rho_tilde))
    a.md1_bound = md1_lower_bound(topology.ports, a.load);
  return a;
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::vector<Verdict> verdict_suite(const ExperimentReport& r) {
  std::vector<Verdict> out;
  const bool emulate = r.config.policy == Policy::emulation;
  const auto& a = r.analytics;
  const double se = r.stderr_queue;

  Verdict mean = make_verdict("a", "mean total queue <= 1/2 sum rho~/(1-rho~) + K(N+2)", r.mean_queue, se, a.mean_bound, 3.0 * se);
  mean.asserted = emulate && r.topology.exact_polytope;
  mean.pass = !mean.asserted || r.mean_queue <= a.mean_bound + 3.0 * se;
  if (!mean.asserted)
    mean.detail = emulate ? "polytope differs from conv(S); reported only" : "bound applies to the emulation policy";
  out.push_back(mean);

  if (a.md1_bound) {
    Verdict md1 = make_verdict("b", "mean total queue >= n rho / (2(1-rho))", r.mean_queue, se, *a.md1_bound, 3.0 * se);
    md1.pass = r.mean_queue >= *a.md1_bound - 3.0 * se;
    out.push_back(md1);
  }

  Verdict tail = make_verdict("c", "tail slope of log P(sum Q >= l) within tolerance of -theta*", 0.0, 0.0, -a.theta_star,
               r.config.tail_tolerance);
  tail.asserted = emulate;
  if (r.tail) {
    tail.simulated = r.tail->slope;
    std::ostringstream d;
    d << "window [" << r.tail->window_low << ", " << r.tail->window_high << "], " << r.tail->samples << " samples";
    tail.detail = d.str();
    tail.pass = !tail.asserted ||
                std::fabs(r.tail->slope + a.theta_star) <= r.config.tail_tolerance * a.theta_star;
  } else {
    tail.asserted = false;
    tail.detail = "not fitted: " + r.tail_error;
  }
  if (!emulate)
    tail.detail += "; reported only for max-weight";
  out.push_back(tail);

  Verdict inv = make_verdict("d", "invariant violation count is zero", static_cast<double>(r.violations.total()), 0.0, 0.0, 0.0);
  inv.pass = r.violations.total() == 0;
  if (!inv.pass) {
    std::ostringstream d;
    for (const auto& [name, count] : r.violations.entries())
      if (count)
        d << name << '=' << count << ' ';
    inv.detail = d.str();
  }
  if (!r.topology.exact_polytope) {
    inv.asserted = false;
    inv.pass = true;
    inv.detail += "polytope differs from conv(S); reported only";
  }
  out.push_back(inv);

  if (emulate && a.md1_bound && r.topology.exact_polytope) {
    const double n = r.topology.ports;
    const double slack = 1.0 - a.load;
    const double hi = n + slack * (n * n + 2.0) * n;
    Verdict sandwich = make_verdict("e", "(1-rho) mean queue in [n/2, n + (1-rho)(n^2+2)n]", slack * r.mean_queue, slack * se,
                     hi, 3.0 * slack * se);
    sandwich.pass = slack * r.mean_queue >= n / 2.0 - 3.0 * slack * se &&
                    slack * r.mean_queue <= hi + 3.0 * slack * se;
    std::ostringstream d;
    d << "interval [" << n / 2.0 << ", " << hi << "]";
    sandwich.detail = d.str();
    out.push_back(sandwich);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.topology = make_topology(config.topology);
  const auto& topo = report.topology;
  if (!config.lambda.empty())
    report.lambda = config.lambda;
  else if (config.rho)
    report.lambda = uniform_load_rates(topo, *config.rho);
  else
    throw ConfigError("config needs 'lambda' or 'rho'");
  if (report.lambda.size() != topo.n_queues())
    throw ConfigError("field 'lambda' has " + std::to_string(report.lambda.size()) + " entries, topology has " +
                      std::to_string(topo.n_queues()) + " queues");
  report.analytics = analyze(topo, report.lambda);

  auto oracle = std::make_shared<const SfaRateOracle>(topo.polytope);
  const int reps = config.replications;
  report.replications.resize(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));

  std::ofstream trace_out;
  if (!config.trace_path.empty())
    trace_out = open_out(config.trace_path);

  auto run_one = [&](int r) {
    try {
      CoupledConfig cc;
      cc.lambda = report.lambda;
      cc.policy = config.policy;
      cc.mw_alpha = config.mw_alpha;
      cc.horizon = config.horizon;
      cc.warmup_fraction = config.warmup_fraction;
      cc.seed = replication_seed(config.seed, r);
      cc.abort_on_violation = config.abort_on_violation;
      cc.oracle = oracle;
      cc.csv_stride = config.csv_stride;
      std::ofstream csv;
      if (!config.csv_path.empty()) {
        csv = open_out(replication_path(config.csv_path, r));
        cc.csv = &csv;
      }
      if (r == 0 && trace_out.is_open())
        cc.bn_trace = &trace_out;
      report.replications[static_cast<std::size_t>(r)] = run_coupled(topo, cc);
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  };

  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, reps);
  if (threads == 1) {
    for (int r = 0; r < reps; ++r)
      run_one(r);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    int next = 0;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        while (true) {
          int r;
          {
            std::lock_guard lock(next_mutex);
            if (next >= reps)
              return;
            r = next++;
          }
          run_one(r);
        }
      });
    for (auto& th : pool)
      th.join();
  }
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  // Merge in replication order.
  std::vector<double> rep_means;
  double workload_sum = 0.0;
  for (const auto& s : report.replications) {
    rep_means.push_back(s.mean_queue);
    workload_sum += s.mean_workload;
    report.violations.merge(s.violations);
    if (report.queue_histogram.size() < s.queue_histogram.size())
      report.queue_histogram.resize(s.queue_histogram.size(), 0);
    for (std::size_t k = 0; k < s.queue_histogram.size(); ++k)
      report.queue_histogram[k] += s.queue_histogram[k];
  }
  double total = 0.0;
  for (double m : rep_means)
    total += m;
  report.mean_queue = total / reps;
  report.mean_workload = workload_sum / reps;
  report.stderr_queue = reps > 1 ? sample_stderr(rep_means) : sample_stderr(report.replications.front().batch_means);

  try {
    report.tail = estimate_tail_exponent(report.queue_histogram);
  } catch (const InsufficientData& e) {
    report.tail_error = e.what();
  }
  report.verdicts = verdict_suite(report);

  if (!config.ccdf_path.empty()) {
    auto out = open_out(config.ccdf_path);
    out << "ell,ccdf,log_ccdf\n" << std::setprecision(12);
    std::int64_t n = 0;
    for (auto c : report.queue_histogram)
      n += c;
    std::int64_t exceed = n;
    for (std::size_t l = 0; l < report.queue_histogram.size(); ++l) {
      const double p = static_cast<double>(exceed) / static_cast<double>(n);
      out << l << ',' << p << ',' << std::log(p) << '\n';
      exceed -= report.queue_histogram[l];
    }
  }
  if (!config.summary_path.empty()) {
    auto out = open_out(config.summary_path);
    out << summary_json(report).dump(2) << '\n';
  }
  return report;
}

json summary_json(const ExperimentReport& r) {
  const auto& t = r.topology;
  const auto& a = r.analytics;
  json doc;
  doc["config"] = to_json(r.config);
  doc["topology"] = {{"name", t.name},
                     {"queues", t.n_queues()},
                     {"resources", t.polytope.rank()},
                     {"k_max", t.k_max()},
                     {"schedules", t.schedules.size()},
                     {"exact_polytope", t.exact_polytope}};
  doc["lambda"] = r.lambda;
  json an{{"load", a.load},
          {"rho_tilde", a.rho_tilde},
          {"mean_workload", a.mean_workload},
          {"theta_star", a.theta_star},
          {"lower_bound_exponent", a.lower_exponent},
          {"mean_bound", a.mean_bound}};
  if (a.md1_bound)
    an["md1_lower_bound"] = *a.md1_bound;
  doc["analytics"] = an;

  json reps = json::array();
  for (std::size_t k = 0; k < r.replications.size(); ++k) {
    const auto& s = r.replications[k];
    json v = json::object();
    for (const auto& [name, count] : s.violations.entries())
      v[name] = count;
    reps.push_back({{"seed", replication_seed(r.config.seed, static_cast<int>(k))},
                    {"mean_queue", s.mean_queue},
                    {"mean_workload", std::isnan(s.mean_workload) ? json(nullptr) : json(s.mean_workload)},
                    {"measured_slots", s.measured_slots},
                    {"returns_to_empty", s.returns_to_empty},
                    {"atom_slots", s.atom_slots},
                    {"fallback_slots", s.fallback_slots},
                    {"max_tracking_load", s.max_tracking_load},
                    {"max_tracking_mass", s.max_tracking_mass},
                    {"batch_means", s.batch_means},
                    {"violations", v}});
  }
  doc["replications"] = reps;
  doc["mean_queue"] = r.mean_queue;
  doc["stderr_queue"] = r.stderr_queue;
  doc["mean_workload"] = std::isnan(r.mean_workload) ? json(nullptr) : json(r.mean_workload);

  json usage = json::object();
  for (std::size_t k = 0; k < t.schedules.size(); ++k) {
    std::int64_t c = 0;
    for (const auto& s : r.replications)
      c += s.schedule_usage[k];
    usage[t.schedules[k].to_string()] = c;
  }
  doc["schedule_usage"] = usage;

  json ccdf = json::array();
  std::int64_t n = 0;
  for (auto c : r.queue_histogram)
    n += c;
  std::int64_t exceed = n;
  for (std::size_t l = 0; l < r.queue_histogram.size(); ++l) {
    ccdf.push_back({l, static_cast<double>(exceed) / static_cast<double>(n)});
    exceed -= r.queue_histogram[l];
  }
  doc["ccdf"] = ccdf;
  if (r.tail)
    doc["tail_fit"] = {{"slope", r.tail->slope},
                       {"window", {r.tail->window_low, r.tail->window_high}},
                       {"samples", r.tail->samples}};
  else
    doc["tail_fit"] = {{"error", r.tail_error}};

  json vs = json::array();
  for (const auto& v : r.verdicts)
    vs.push_back({{"id", v.id},
                  {"description", v.description},
                  {"simulated", v.simulated},
                  {"stderr", v.stderr_},
                  {"analytic", v.analytic},
                  {"tolerance", v.tolerance},
                  {"asserted", v.asserted},
                  {"pass", v.pass},
                  {"detail", v.detail}});
  doc["verdicts"] = vs;
  doc["all_pass"] = r.all_pass();
  return doc;
}

void write_verdicts(std::ostream& out, const std::vector<Verdict>& verdicts) {
  out << std::setprecision(6);
  for (const auto& v : verdicts) {
    out << (v.pass ? (v.asserted ? "PASS" : "INFO") : "FAIL") << " (" << v.id << ") " << v.description
        << ": simulated " << v.simulated;
    if (v.stderr_ > 0.0)
      out << " +- " << v.stderr_;
    out << ", analytic " << v.analytic;
    if (!v.detail.empty())
      out << " [" << v.detail << ']';
    out << '\n';
  }
}

void write_analytics_csv(std::ostream& out, const Topology& topology, std::span<const double> lambda) {
  const auto a = analyze(topology, lambda);
  const std::string net = "topology=" + topology.name;
  out << "quantity,parameters,value\n" << std::setprecision(12);
  out << "queues," << net << ',' << topology.n_queues() << '\n';
  out << "resources," << net << ',' << topology.polytope.rank() << '\n';
  out << "k_max," << net << ',' << topology.k_max() << '\n';
  out << "schedules," << net << ',' << topology.schedules.size() << '\n';
  out << "load," << net << ',' << a.load << '\n';
  for (std::size_t j = 0; j < a.rho_tilde.size(); ++j)
    out << "rho_tilde," << net << " resource=" << j << ',' << a.rho_tilde[j] << '\n';
  out << "phi_normalizer," << net << ',' << phi_normalizer(lambda, topology.polytope) << '\n';
  out << "mean_workload," << net << ',' << a.mean_workload << '\n';
  out << "theta_star," << net << " rho=" << a.load << ',' << a.theta_star << '\n';
  const auto ex = lower_bound_exponents(lambda, topology.polytope);
  for (std::size_t j = 0; j < ex.per_resource.size(); ++j)
    out << "resource_exponent," << net << " resource=" << j << ',' << ex.per_resource[j] << '\n';
  out << "resource_exponent_min," << net << ',' << ex.min << '\n';
  out << "mean_queue_bound," << net << ',' << a.mean_bound << '\n';
  if (a.md1_bound)
    out << "md1_lower_bound," << net << " n=" << topology.ports << ',' << *a.md1_bound << '\n';
  for (int l = 0; l <= 10; ++l)
    out << "total_count_pmf," << net << " L=" << l << ',' << total_count_distribution(l, lambda, topology.polytope)
        << '\n';
}

}  // namespace switchlab
