#pragma once

#include <cstdint>
#include <vector>

#include "ruin/chain.hpp"
#include "ruin/risk_model.hpp"

namespace ruin {

/// Fixed-effort multilevel splitting for ψ(x) far below plain Monte Carlo reach.
/// Intermediate levels x > l_1 > ... > l_m = 0 are picked by a pilot run
/// (empirical quantiles of the running minimum); the main run then uses
/// independent replicates, so the interval comes from replicate spread.
struct SplittingOptions {
  std::uint64_t particles = 2000;        // per stage and replicate
  std::uint64_t pilot_particles = 1000;
  double pilot_quantile = 0.15;          // target conditional probability per stage
  std::uint64_t replicates = 8;
  std::size_t max_levels = 64;
  unsigned threads = 0;
};

struct SplittingEstimate {
  double x = 0.0;
  double p_hat = 0.0;
  double half_width = 0.0;
  std::vector<double> levels;              // l_1 > ... > l_m = 0
  std::vector<double> replicate_estimates;
  std::vector<double> stage_probabilities; // averaged over replicates
};

SplittingEstimate estimate_ruin_splitting(const RiskModel& model, double x, const PathCaps& caps,
                                          std::uint64_t seed, const SplittingOptions& options = {});

}  // namespace ruin
