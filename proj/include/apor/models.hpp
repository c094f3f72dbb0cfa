#pragma once

// The three benchmark systems: consensus, vehicle platoon, room heating.

#include <optional>
#include <string>
#include <vector>

#include "apor/lts.hpp"
#include "apor/reach.hpp"

namespace apor {

struct ModelPreset {
  std::string name;
  TransitionSystem system;
  double epsilon = 0.0;
  double delta0 = 1.0;
  std::size_t horizon = 0;
  /// Decimal places the discrepancy coefficients are rounded up to.
  int discrepancy_decimals = 2;
  std::optional<SafetyQuery> safety;
  std::vector<std::string> assumptions;
};

struct ConsensusParams {
  /// One n x n matrix per agent action; empty means the 3x3 defaults.
  std::vector<Matrix> matrices;
  Vector init_center;
  double init_radius = 0.5;
  std::optional<double> invariant_radius;
  double epsilon = 0.1;
  double delta0 = 0.5;
  std::size_t rounds = 3;
  double safe_bound = 0.4;
};

ModelPreset build_consensus(const ConsensusParams& params = {});

struct PlatoonParams {
  std::size_t cars = 2;
  double dt = 0.1;
  std::vector<double> accelerations{10.0, -10.0, 0.0};
  double accelerate_gap = 50.0;
  double brake_gap = 30.0;
  double velocity = 10.0;
  /// Leader first. Empty means evenly spaced by `spacing`.
  std::vector<double> positions;
  double spacing = 40.0;
  /// Box half-widths per car position (box mode) or ball radius (ball mode).
  std::vector<double> position_spread;
  double ball_radius = 0.0;
  double epsilon = 0.282;
  double delta0 = 0.5;
  std::size_t horizon = 10;
  double min_gap = 0.0;
};

ModelPreset build_platoon(const PlatoonParams& params = {});

/// Parameters of the named platoon scenarios (platoon2, platoon2-40,
/// platoon2-25, platoon4); nullopt for other names.
std::optional<PlatoonParams> platoon_scenario(const std::string& name);

struct HeatingParams {
  Vector init_center;
  double init_radius = 2.0;
  double threshold = 70.0;
  double epsilon = 0.6;
  double delta0 = 2.0;
  std::size_t rounds = 8;
  double safe_lower = 60.0;
  double safe_upper = 79.0;
};

ModelPreset build_heating(const HeatingParams& params = {});

/// consensus, heating, platoon2, platoon2-40, platoon2-25, platoon4.
/// Throws ConfigError for anything else.
ModelPreset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace apor
