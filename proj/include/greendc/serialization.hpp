#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "greendc/baselines.hpp"
#include "greendc/online.hpp"
#include "greendc/scenario.hpp"
#include "greendc/sim.hpp"
#include "greendc/tuning.hpp"

namespace greendc {

using Json = nlohmann::ordered_json;

Json to_json(const SystemConfig& config);
/// Fields absent from `j` keep their value in `config`.
void merge_json(const Json& j, SystemConfig& config);

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);
Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j);

Json to_json(const UncertaintyBounds& bounds);
UncertaintyBounds bounds_from_json(const Json& j);

Json to_json(const Experiment& experiment);
/// Overlays `j` on the built-in default experiment and validates the result.
Experiment experiment_from_json(const Json& j);
Experiment load_experiment(const std::filesystem::path& path);

Json to_json(const StrategyParams& params);
StrategyParams params_from_json(const Json& j);

Json to_json(const TuningReport& report);
Json to_json(const Report& report);

/// Deterministic text: two-space indent, trailing newline.
std::string dump(const Json& j);
Json load_json(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace greendc
