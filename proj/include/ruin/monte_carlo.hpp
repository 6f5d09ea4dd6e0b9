#pragma once

#include <cstdint>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "ruin/chain.hpp"
#include "ruin/risk_model.hpp"

namespace ruin {

/// level_cap = max(100 x, 1e4), max_steps = 1e6.
PathCaps default_caps(double x);

/// Variance-reduction switches. The defaults give plain Monte Carlo.
struct EstimatorOptions {
  unsigned threads = 0;
  /// Russian roulette on the way up: each time a path first exceeds
  /// x0·2^k (k ≥ 1) it survives with this probability and its weight is
  /// divided by it. Unbiased; cuts the cost of paths escaping to the cap.
  std::optional<double> roulette;
  /// Score the conditional ruin probability P{ξ > V_x(τ) | τ} at every step and
  /// continue with ξ drawn below V_x(τ); the path itself never ruins.
  bool expected_value_scoring = false;
  /// Exact binomial interval in [ci_low, ci_high] (plain mode only).
  bool clopper_pearson = false;
  /// Path i uses stream id stream_offset + i.
  std::uint64_t stream_offset = 0;
};

struct RuinEstimate {
  double x = 0.0;
  double p_hat = 0.0;
  double half_width = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t censored_cap = 0;
  std::uint64_t censored_horizon = 0;
  double p_hat_pessimistic = 0.0;

  std::uint64_t ruined = 0;           // paths that hit (−∞, 0)
  std::uint64_t killed = 0;           // paths ended by roulette
  double sum = 0.0;                   // Σ per-path scores
  double sum_sq = 0.0;                // Σ squared scores
  double sum_pessimistic = 0.0;       // Σ scores with horizon mass counted as ruin
  bool weighted = false;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

RuinEstimate estimate_ruin(const RiskModel& model, double x, std::uint64_t n_paths, const PathCaps& caps,
                           std::uint64_t seed, const EstimatorOptions& options = {});

/// Pools two estimates at the same level drawn from disjoint stream ranges.
RuinEstimate merge(const RuinEstimate& a, const RuinEstimate& b);

/// estimate_ruin over a grid; grid point g uses streams [g·n, (g+1)·n).
/// Caps default to default_caps(x) per point when not given.
std::vector<RuinEstimate> ruin_curve(const RiskModel& model, const std::vector<double>& xs, std::uint64_t n_paths,
                                     const std::optional<PathCaps>& caps, std::uint64_t seed,
                                     const EstimatorOptions& options = {});

struct DecayFit {
  double rho_hat;
  double std_error;
  double intercept;
  std::size_t points;
};

/// Weighted least squares of log p_hat on log(1 + x), weights (p_hat/half_width)².
DecayFit decay_exponent_fit(const std::vector<RuinEstimate>& curve);

struct GammaLimitReport {
  std::uint64_t n_steps = 0;
  std::uint64_t survivors = 0;
  std::uint64_t simulated = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_std_error = 0.0;
  double reference_mean = 0.0;
  double reference_variance = 0.0;
  /// (probability, empirical quantile, Γ reference quantile)
  std::vector<std::tuple<double, double, double>> quantiles;
};

/// Runs paths from x0 = 1 for n steps, keeps the first `n_survivors` paths (in
/// stream order) that never went below 0 and reports moments of R_n²/n.
GammaLimitReport gamma_limit_test(const RiskModel& model, std::uint64_t n_steps, std::uint64_t n_survivors,
                                  std::uint64_t seed, unsigned threads = 0);

}  // namespace ruin
