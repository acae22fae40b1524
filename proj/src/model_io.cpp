#include "switchlab/model_io.hpp"

#include <fstream>

#include "switchlab/errors.hpp"

namespace switchlab {

using nlohmann::json;

json to_json(const ScheduleSet& set, const ResourcePolytope& polytope) {
  json doc;
  doc["n"] = set.n_queues();
  json scheds = json::array();
  for (const auto& s : set.schedules()) {
    json row = json::array();
    for (auto v : s.entries())
      row.push_back(int(v));
    scheds.push_back(std::move(row));
  }
  doc["schedules"] = std::move(scheds);
  doc["R"] = polytope.r_matrix();
  doc["C"] = polytope.capacities();
  return doc;
}

NetworkModel model_from_json(const json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    std::vector<Schedule> scheds;
    for (const auto& row : doc.at("schedules")) {
      const auto ints = row.get<std::vector<int>>();
      scheds.push_back(Schedule::from_ints(ints));
    }
    NetworkModel model;
    model.schedules = monotone_close(scheds, n);
    model.polytope = ResourcePolytope(doc.at("R").get<std::vector<std::vector<double>>>(),
                                      doc.at("C").get<std::vector<double>>());
    if (model.polytope.n_routes() != n)
      throw DimensionError("R has " + std::to_string(model.polytope.n_routes()) + " columns but n = " +
                           std::to_string(n));
    if (!model.polytope.contains_all(model.schedules))
      throw DomainError("some schedule violates R sigma <= C");
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network model: ") + e.what());
  }
}

NetworkModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const std::string& path, const ScheduleSet& set, const ResourcePolytope& polytope) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write model file " + path);
  out << to_json(set, polytope).dump(2) << '\n';
}

}  // namespace switchlab
