#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ipmsm/scenario.hpp"

namespace ipmsm {

/// Everything a scenario run needs.
struct RunConfig {
  SimulationConfig sim;
  ScenarioTimeline timeline = ScenarioTimeline::reference_run();
};

/// One axis of a parameter sweep: a dotted key such as "dcee.k_x" and its values.
struct SweepAxis {
  std::string key;
  std::vector<nlohmann::json> values;
};

/// Serialized defaults; every tunable constant appears here.
nlohmann::json default_config_json();

/// Overlays `doc` on the defaults and builds a validated RunConfig. Unknown
/// keys and wrongly typed values raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RunConfig& cfg);

/// Reads a JSON config file; ConfigError carries the path.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Parses the optional "sweep" section (object of key -> array).
std::vector<SweepAxis> sweep_axes(const nlohmann::json& doc);

/// Cartesian product of the sweep axes applied to `doc` (without its "sweep"
/// section). Each entry carries a short label like "dcee.k_x=0.1,bank.count=3".
std::vector<std::pair<std::string, nlohmann::json>> expand_sweep(const nlohmann::json& doc);

/// Sets a dotted key in a JSON document, creating objects as needed.
void set_dotted(nlohmann::json& doc, const std::string& key, const nlohmann::json& value);

}  // namespace ipmsm
