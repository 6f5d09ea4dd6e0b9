#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruin/chain.hpp"
#include "ruin/monte_carlo.hpp"
#include "ruin/risk_model.hpp"

namespace ruin {

/// Coefficients of the drift target q(x) = Σ_{j<γ} r_j (b_shift + x)^{−αj}.
struct PowerCase {
  double alpha = 0.0;
  int gamma = 0;              // min{k : αk > 1}
  std::vector<double> r;      // r_1 … r_{γ−1}
  double b_shift = 1.0;
  bool log_corrected = false; // α = 1/(γ−1)
  std::vector<double> residuals;  // u^1 … u^{γ−1} coefficients after the solve
};

/// Test functions of the light-tailed theory. For the inverse profile
/// q(x) = (ρ+1)min(1, 1/x) and the envelope p(x) = min(q(x), s·max(x,1)^−k)
/// perturbs it into q± = q ± p. For the power profile only q and Q are
/// available.
class LyapunovProfile {
 public:
  double rho() const { return rho_; }
  double envelope_scale() const { return s_; }
  double envelope_exponent() const { return k_; }
  /// ∫_0^∞ p
  double c_p() const { return s_ + s_ / (k_ - 1.0); }
  const std::optional<PowerCase>& power_case() const { return power_; }

  double q(double x) const;
  double Q(double x) const;
  double p(double x) const;
  double P(double x) const;
  double q_plus(double x) const { return q(x) + p(x); }
  double q_minus(double x) const { return q(x) - p(x); }
  double Q_plus(double x) const { return Q(x) + P(x); }
  double Q_minus(double x) const { return Q(x) - P(x); }

  /// ∫_x^∞ e^{−Q}; constant below 0.
  double U(double x) const;
  double U_plus(double x) const { return U_pm(x, +1); }
  double U_minus(double x) const { return U_pm(x, -1); }

  friend LyapunovProfile build_profile_inverse(const RiskModel&, double, double);
  friend LyapunovProfile build_profile_power(const RiskModel&);

 private:
  double U_pm(double x, int sign) const;
  void require_inverse(const char* what) const;

  double rho_ = 0.0;
  double s_ = 1.0;
  double k_ = 1.5;
  std::optional<PowerCase> power_;
};

/// Requires ρ > 0 and envelope_scale ≤ ρ + 1.
LyapunovProfile build_profile_inverse(const RiskModel& model, double envelope_scale = 1.0,
                                      double envelope_exponent = 1.5);
/// CriticalPower rates; q from r_coefficients.
LyapunovProfile build_profile_power(const RiskModel& model);

struct BoundEnvelope {
  double lower;
  double upper;
};

/// upper = U_−(x)/U_−(x_hat); lower = δ·U_+(x)/U_+(0). Requires x > x_hat.
BoundEnvelope bound_envelope(const LyapunovProfile& profile, double x, double x_hat, double delta);

/// δ = min over starts in (0, x_hat] of the lower 95% confidence limit of ψ̂.
double calibrate_delta(const RiskModel& model, double x_hat, std::uint64_t n_paths, const PathCaps& caps,
                       std::uint64_t seed, const EstimatorOptions& options = {});

struct DriftLevel {
  double x;
  double drift_minus;
  double se_minus;
  double drift_plus;
  double se_plus;
  double scale_minus;  // p(x) e^{−Q_−(x)}
  double scale_plus;   // p(x) e^{−Q_+(x)}
};

struct DriftReport {
  std::vector<DriftLevel> levels;
  std::optional<double> x_hat;
  bool control_variates = false;
  std::vector<std::string> warnings;
};

/// MC estimate of E U_±(x + ξ(x)) − U_±(x). With control variates the Taylor
/// terms U'(x)Y + ½U''(x)(Y² − b), Y = v_cτ − ξ, whose mean is exactly zero,
/// are subtracted draw by draw (the quadratic term needs finite fourth moments).
DriftReport drift_check(const LyapunovProfile& profile, const RiskModel& model, const std::vector<double>& xs,
                        std::uint64_t n_draws, std::uint64_t seed, unsigned threads = 0,
                        bool control_variates = true);

enum class Classification { Transient, Recurrent, Inconclusive };

struct ClassifyResult {
  Classification kind;
  double theta;
  double threshold;
  std::optional<double> rho;
  std::string message;
};

ClassifyResult classify(const RiskModel& model);
std::string to_string(Classification c);

/// a[k][j] = C(k,j) θ^j E τ^j (v_cτ − ξ)^{k−j}, 0 ≤ j ≤ k ≤ γ.
std::vector<std::vector<double>> a_coefficients(const RiskModel& model, double theta, int gamma);

PowerCase r_coefficients(const RiskModel& model, double theta, double alpha);

/// Case (i) (log-corrected): x^{α − r_{γ−1}} exp{−Σ_{j≤γ−2} r_j x^{1−αj}/(1−αj)};
/// case (ii): x^α exp{−Σ_{j≤γ−1} r_j x^{1−αj}/(1−αj)}.
double power_case_shape(const PowerCase& pc, double x);

}  // namespace ruin
