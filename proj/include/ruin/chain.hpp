#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ruin/risk_model.hpp"
#include "ruin/rng.hpp"

namespace ruin {

struct PathCaps {
  std::uint64_t max_steps = 1'000'000;
  double level_cap = 1e4;
};

enum class SurvivalReason { HitCap, HorizonExhausted };

struct Ruined {
  std::uint64_t step;
};

struct Survived {
  SurvivalReason reason;
  std::uint64_t steps;
};

using PathOutcome = std::variant<Ruined, Survived>;

/// Embedded chain observed at claim epochs. `states` is {R_0} only in
/// streaming mode.
struct ChainPath {
  std::vector<double> states;
  PathOutcome outcome;
};

/// One increment V_x(τ) − x − ξ; draws τ first, then ξ.
double sample_jump(const RiskModel& model, double x, RngStream& rng);

/// Iterates R_{n+1} = R_n + ξ(R_n) until R_n < 0, R_n > level_cap or max_steps.
ChainPath simulate_path(const RiskModel& model, double x0, const PathCaps& caps, RngStream& rng,
                        bool store_states = true);

struct MomentEstimate {
  double value;
  double std_error;
};

/// Monte Carlo E ξ(x)^k for k = 1..k_max. With control variates each draw
/// scores ξ(x)^k − Y^k + E Y^k, Y = v_cτ − ξ built from the same τ and ξ, whenever
/// E Y^k is finite; otherwise the plain power is used. Draws are split over
/// fixed chunks with their own streams, so the result does not depend on
/// `threads`.
std::vector<MomentEstimate> jump_moment_estimates(const RiskModel& model, double x, int k_max,
                                                  std::uint64_t n_draws, std::uint64_t seed,
                                                  unsigned threads = 0, bool control_variates = true);

}  // namespace ruin
