#pragma once

/// JSON (de)serialization for scenarios: a single structured file describes
/// the protocol parameters, agent behavior, and device programs; CLI flags
/// may override individual fields afterwards. Parsing throws
/// std::invalid_argument naming the offending field.

#include <string>

#include <json.hpp>

#include "relbc/harness.hpp"

namespace relbc::config {

nlohmann::json scenario_to_json(const harness::Scenario& scenario);
harness::Scenario scenario_from_json(const nlohmann::json& j);

/// File helpers; load throws std::invalid_argument on unreadable files or
/// invalid content, save throws std::runtime_error on write failure.
harness::Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const harness::Scenario& scenario, const std::string& path);

}  // namespace relbc::config
