#pragma once

#include <string>

#include <json.hpp>

#include "switchlab/polytope.hpp"
#include "switchlab/schedule.hpp"

namespace switchlab {

/// A schedule set together with its resource representation.
///
/// JSON form: {"n": N, "schedules": [[0,1,...], ...], "R": [[...], ...], "C": [...]}.
/// Schedules are closed under sub-schedules on load.
struct NetworkModel {
  ScheduleSet schedules;
  ResourcePolytope polytope;
};

nlohmann::json to_json(const ScheduleSet& set, const ResourcePolytope& polytope);
NetworkModel model_from_json(const nlohmann::json& doc);

NetworkModel load_model(const std::string& path);
void save_model(const std::string& path, const ScheduleSet& set, const ResourcePolytope& polytope);

}  // namespace switchlab
