#include "switchlab/topology.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <random>

#include <json.hpp>

#include "switchlab/decomposition.hpp"
#include "switchlab/errors.hpp"
#include "switchlab/model_io.hpp"

namespace switchlab {

namespace {

int parse_count(const std::string& spec, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size())
      throw ConfigError("bad number in topology spec '" + spec + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number in topology spec '" + spec + "'");
  }
}

std::vector<Schedule> all_binary(std::size_t n, const std::function<bool(const Schedule&)>& keep) {
  std::vector<Schedule> out;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    Schedule s(n);
    for (std::size_t i = 0; i < n; ++i)
      s.set(i, (mask >> i) & 1U);
    if (keep(s))
      out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Topology iq_switch(int n) {
  if (n < 1)
    throw DomainError("switch needs at least one port");
  if (n > kMaxSwitchPorts)
    throw CapacityError("switch enumeration limited to " + std::to_string(kMaxSwitchPorts) + " ports");
  const auto un = static_cast<std::size_t>(n);
  const std::size_t nq = un * un;
  auto matchings = all_binary(nq, [un](const Schedule& s) {
    for (std::size_t a = 0; a < un; ++a) {
      int row = 0, col = 0;
      for (std::size_t b = 0; b < un; ++b) {
        row += s[a * un + b];
        col += s[b * un + a];
      }
      if (row > 1 || col > 1)
        return false;
    }
    return true;
  });

  std::vector<std::vector<double>> r(2 * un, std::vector<double>(nq, 0.0));
  for (std::size_t k = 0; k < un; ++k)
    for (std::size_t l = 0; l < un; ++l) {
      r[k][k * un + l] = 1.0;
      r[un + l][k * un + l] = 1.0;
    }

  Topology t;
  t.name = "iq:" + std::to_string(n);
  t.schedules = ScheduleSet::from_closed(std::move(matchings), nq);
  t.polytope = ResourcePolytope(std::move(r), std::vector<double>(2 * un, 1.0));
  t.ports = n;
  for (std::size_t k = 0; k < un; ++k)
    for (std::size_t l = 0; l < un; ++l)
      t.labels.push_back("in" + std::to_string(k) + "->out" + std::to_string(l));
  return t;
}

Topology independent_set(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0)
    throw DomainError("graph has no nodes");
  if (n > kMaxIndependentSetNodes)
    throw CapacityError("independent-set enumeration limited to " + std::to_string(kMaxIndependentSetNodes) +
                        " nodes");
  for (const auto& row : adjacency)
    if (row.size() != n)
      throw DimensionError("adjacency matrix is not square");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const int v = adjacency[a][b];
      if (v != 0 && v != 1)
        throw DomainError("adjacency entries must be 0 or 1");
      if (v != adjacency[b][a])
        throw DomainError("adjacency matrix is not symmetric");
      if (a == b && v)
        throw DomainError("self-loop on node " + std::to_string(a));
      if (a < b && v)
        edges.emplace_back(a, b);
    }

  auto sets = all_binary(n, [&](const Schedule& s) {
    for (auto [a, b] : edges)
      if (s[a] && s[b])
        return false;
    return true;
  });

  std::vector<std::vector<double>> r;
  std::vector<bool> covered(n, false);
  for (auto [a, b] : edges) {
    std::vector<double> row(n, 0.0);
    row[a] = row[b] = 1.0;
    covered[a] = covered[b] = true;
    r.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!covered[i]) {
      std::vector<double> row(n, 0.0);
      row[i] = 1.0;
      r.push_back(std::move(row));
    }

  Topology t;
  t.name = "independent-set";
  t.schedules = ScheduleSet::from_closed(std::move(sets), n);
  const std::size_t rows = r.size();
  t.polytope = ResourcePolytope(std::move(r), std::vector<double>(rows, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    t.labels.push_back("node" + std::to_string(i));
  t.exact_polytope = polytope_matches_schedules(t, 200, 0x5eed);
  return t;
}

std::pair<Topology, Topology> parallel_vs_pooled(int n) {
  if (n < 1)
    throw DomainError("need at least one queue");
  if (n > kMaxParallelQueues)
    throw CapacityError("parallel/pooled limited to " + std::to_string(kMaxParallelQueues) + " queues");
  const auto un = static_cast<std::size_t>(n);

  Topology par;
  par.name = "parallel:" + std::to_string(n);
  par.schedules = ScheduleSet::from_closed(all_binary(un, [](const Schedule&) { return true; }), un);
  std::vector<std::vector<double>> eye(un, std::vector<double>(un, 0.0));
  for (std::size_t i = 0; i < un; ++i)
    eye[i][i] = 1.0;
  par.polytope = ResourcePolytope(std::move(eye), std::vector<double>(un, 1.0));

  Topology pool;
  pool.name = "pooled:" + std::to_string(n);
  pool.schedules = monotone_close({}, un);
  pool.polytope = ResourcePolytope({std::vector<double>(un, 1.0)}, {1.0});

  for (std::size_t i = 0; i < un; ++i) {
    par.labels.push_back("q" + std::to_string(i));
    pool.labels.push_back("q" + std::to_string(i));
  }
  return {std::move(par), std::move(pool)};
}

Topology single_queue() {
  Topology t;
  t.name = "single";
  t.schedules = monotone_close({}, 1);
  t.polytope = ResourcePolytope({{1.0}}, {1.0});
  t.labels = {"q0"};
  return t;
}

Topology two_route_network() {
  Topology t;
  t.name = "pair";
  t.schedules = monotone_close({}, 2);
  t.polytope = ResourcePolytope({{1.0, 1.0}, {0.0, 1.0}}, {1.0, 1.0});
  t.labels = {"r0", "r1"};
  return t;
}

std::vector<std::vector<int>> load_adjacency(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open graph file " + path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc.at("adjacency").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Topology make_topology(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty())
      throw ConfigError("topology spec '" + spec + "' needs an argument");
  };
  if (kind == "iq") {
    need_arg();
    return iq_switch(parse_count(spec, arg));
  }
  if (kind == "pooled" || kind == "parallel") {
    need_arg();
    auto pair = parallel_vs_pooled(parse_count(spec, arg));
    return kind == "pooled" ? std::move(pair.second) : std::move(pair.first);
  }
  if (kind == "single")
    return single_queue();
  if (kind == "pair")
    return two_route_network();
  if (kind == "independent-set") {
    need_arg();
    auto t = independent_set(load_adjacency(arg));
    t.name = spec;
    return t;
  }
  if (kind == "file") {
    need_arg();
    auto model = load_model(arg);
    Topology t;
    t.name = spec;
    t.schedules = std::move(model.schedules);
    t.polytope = std::move(model.polytope);
    for (std::size_t i = 0; i < t.schedules.n_queues(); ++i)
      t.labels.push_back("q" + std::to_string(i));
    t.exact_polytope = polytope_matches_schedules(t, 200, 0x5eed);
    return t;
  }
  throw ConfigError("unknown topology '" + spec + "'");
}

bool polytope_matches_schedules(const Topology& topology, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution keep(0.7);
  const std::size_t n = topology.n_queues();
  std::vector<double> x(n);
  for (int s = 0; s < samples; ++s) {
    for (auto& v : x)
      v = keep(rng) ? u(rng) : 0.0;
    const double a = schedule_load(x, topology.schedules);
    const double b = load(x, topology.polytope);
    if (std::fabs(a - b) > 1e-7 * std::max(1.0, a))
      return false;
  }
  return true;
}

}  // namespace switchlab
