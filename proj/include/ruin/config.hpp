#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ruin/chain.hpp"
#include "ruin/monte_carlo.hpp"
#include "ruin/risk_model.hpp"
#include "ruin/splitting.hpp"

namespace ruin {

/// Parsed experiment. `resolved` is the input with every default filled in;
/// it is echoed into output headers.
struct ExperimentConfig {
  ExperimentConfig(nlohmann::json r, RiskModel m) : resolved(std::move(r)), model(std::move(m)) {}

  nlohmann::json resolved;
  RiskModel model;

  std::vector<double> grid;
  double x = 10.0;
  double reference_x = 0.0;  // 0 → first grid point
  std::uint64_t n_paths = 10000;
  std::optional<PathCaps> caps;
  EstimatorOptions estimator;
  std::optional<SplittingOptions> splitting;
  std::optional<std::uint64_t> seed;

  std::uint64_t gamma_steps = 10000;
  std::uint64_t gamma_paths = 10000;

  std::vector<double> drift_grid{5, 10, 20, 40, 80};
  std::uint64_t drift_draws = 1'000'000;
  double envelope_scale = 1.0;
  double envelope_exponent = 1.5;
  std::uint64_t delta_paths = 10000;
  std::optional<double> delta;

  std::vector<double> heavy_anchors;

  double profile_x_max = 100.0;
  std::size_t profile_points = 200;
};

RiskModel parse_model(const nlohmann::json& j);
ExperimentConfig parse_config(const nlohmann::json& j);
/// Throws ModelError on unreadable, empty or malformed files.
ExperimentConfig load_config(const std::string& path);

}  // namespace ruin
