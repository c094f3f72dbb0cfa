#pragma once

// JSON run configuration and (de)serialisation of transition systems.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "apor/lts.hpp"
#include "apor/models.hpp"
#include "apor/reach.hpp"

namespace apor {

struct RunConfig {
  /// Preset name, or "inline" when `system` holds a full definition.
  std::string model = "consensus";
  /// Builder parameters layered over the preset's defaults.
  nlohmann::json model_params = nlohmann::json::object();
  std::optional<nlohmann::json> system;

  std::optional<double> delta0;
  std::optional<double> epsilon;
  std::optional<std::size_t> horizon;
  std::optional<Norm> norm;
  std::optional<int> discrepancy_decimals;
  std::optional<SafetyQuery> safety;

  std::uint64_t seed = 1;
  /// 0 = hardware concurrency.
  std::size_t workers = 0;
  std::size_t oracle_samples = 100;
  bool full_history = true;
  std::size_t tuple_budget = 5'000'000;
  std::size_t node_budget = 10'000'000;
};

/// Throws ConfigError with a readable message on any schema problem.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// The model with every override applied.
ModelPreset resolve_model(const RunConfig& config);

nlohmann::json system_to_json(const TransitionSystem& system);
TransitionSystem system_from_json(const nlohmann::json& j);

nlohmann::json safety_to_json(const SafetyQuery& q);
SafetyQuery safety_from_json(const nlohmann::json& j);

}  // namespace apor
