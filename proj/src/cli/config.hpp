#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qslice/quarantine_sim.hpp"
#include "qslice/traffic_model.hpp"

namespace qslice::cli {

/// Scenario plus experiment and reassignment settings, as read from a JSON
/// document (see docs/config.schema.json).
struct ScenarioConfig {
  ScenarioParams params;
  std::uint64_t rounds = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 0;

  ReassignmentMode mode = ReassignmentMode::Reactive;
  TimingSampling timing = TimingSampling::Constant;
  std::size_t reps = 100;

  /// Monte Carlo vs exact agreement bound, in standard errors.
  double tolerance_se = 3.0;
};

/// QSLICE_SEED when set (decimal), 1 otherwise.
std::uint64_t default_seed();

/// Defaults with the environment seed applied.
ScenarioConfig default_config();

/// Throws InvalidInput on unknown keys, wrong types or out-of-range values.
ScenarioConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace qslice::cli
