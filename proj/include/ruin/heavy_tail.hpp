#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ruin/chain.hpp"
#include "ruin/monte_carlo.hpp"
#include "ruin/risk_model.hpp"

namespace ruin {

enum class KaramataMethod { Auto, Quadrature };

/// ∫_x^∞ y P{ξ > y} dy. Auto uses the identity ½E(ξ² − x²)⁺ in closed form;
/// Quadrature integrates the tail directly (Pareto-type and exponential only).
double karamata_integral(const Distribution& xi, double x, KaramataMethod method = KaramataMethod::Auto);

/// Tail index β of a ParetoType claim law and ρ of the model; throws when the
/// model is outside the heavy regime (β ≥ ρ).
std::pair<double, double> heavy_regime(const RiskModel& model);

struct HeavyAnchor {
  double x;
  double p_hat;
  double half_width;
};

struct HeavyCalibration {
  std::vector<HeavyAnchor> anchors;
  double c_low;   // min over anchors of (p̂ − hw)/(x² tail(x))
  double c_high;  // max over anchors of (p̂ + hw)/(x² tail(x))
};

HeavyCalibration calibrate_heavy(const RiskModel& model, const std::vector<HeavyAnchor>& anchors);

struct HeavyEnvelope {
  double lower;
  double upper;
  double shape;  // x² P{ξ > x}
};

HeavyEnvelope heavy_envelope(const RiskModel& model, double x, const HeavyCalibration& calibration);

struct LeftTailRow {
  double y;
  double ratio;      // P{ξ(x) < −y} / P{ξ > y}
  double std_error;
};

/// Conditional Monte Carlo over τ: P{ξ(x) < −y} = E P{ξ > V_x(τ) − x + y | τ}.
std::vector<LeftTailRow> left_tail_check(const RiskModel& model, double x, const std::vector<double>& ys,
                                         std::uint64_t n_draws, std::uint64_t seed, unsigned threads = 0);

/// One jump of the truncated chain: the law of ξ(x) given ξ(x) ≥ −x/2. τ is
/// accepted with probability P{ξ ≤ V_x(τ) − x/2}, then ξ is drawn below it.
double truncated_jump(const RiskModel& model, double x, RngStream& rng);
/// Plain rejection: redraw (τ, ξ) until the jump is at least −x/2.
double truncated_jump_rejection(const RiskModel& model, double x, RngStream& rng);

struct TruncatedChainStats {
  std::vector<std::pair<double, double>> g_table;        // (y, ĝ(y))
  std::vector<std::pair<double, double>> renewal_mass;   // (y, Ĥ_x(0, y])
  double psi_tilde_hat = 0.0;       // truncated chain never goes below 0
  double down_crossing_hat = 0.0;   // P_x{R̃_n ≤ 1 for some n ≥ 1}
  double big_jump_term = 0.0;       // E Σ_n (1 − g(R̃_n)), pathwise estimate
  double big_jump_se = 0.0;
  double big_jump_grid = 0.0;       // Σ_bins (1 − ĝ(lower edge)) ΔĤ
  RuinEstimate psi;                 // ψ̂(x) of the original chain
  double slack = 0.0;               // ψ̃ + big_jump_term − ψ̂
  double slack_se = 0.0;
  double min_acceptance = 1.0;
};

TruncatedChainStats truncated_diagnostics(const RiskModel& model, double x, std::uint64_t n_paths,
                                          const PathCaps& caps, std::uint64_t seed,
                                          const EstimatorOptions& options = {}, std::size_t grid_points = 24,
                                          std::uint64_t g_draws = 20000);

struct LowerBoundProbe {
  double confinement;      // P_x{R_k ∈ [x/2, 2x] for all k ≤ N}
  double confinement_se;
  double c_hat;            // min over y ∈ {x/2, x, 2x} of P{ξ(y) < −2x}
  std::uint64_t horizon;   // N = ⌊δ x²⌋
  double lower;            // c · N · confinement
  double normalized;       // lower / (x² P{ξ > x})
};

LowerBoundProbe lower_bound_probe(const RiskModel& model, double x, double delta, std::uint64_t n_paths,
                                  std::uint64_t seed, unsigned threads = 0, std::uint64_t c_draws = 100000);

}  // namespace ruin
