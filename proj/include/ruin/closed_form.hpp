#pragma once

#include <variant>
#include <vector>

#include "ruin/premium_rate.hpp"
#include "ruin/quadrature.hpp"

namespace ruin {

/// Exponential inter-claim times (rate λ) and claim sizes (rate μ).
struct ExpExpParams {
  double lambda;
  double mu;
  PremiumRate rate;
};

/// Evaluates I(x) = ∫_x^∞ (1/v(y)) exp{λ ∫_0^y (1/v(z) − μ/λ) dz} dy by
/// adaptive quadrature with an analytic remainder. The inner integral is exact
/// for constant, inverse and tabulated rates and cached on a geometric grid
/// for the power family. Not thread-safe (lazy cache); use one per thread.
class ExpExpOracle {
 public:
  explicit ExpExpOracle(ExpExpParams params);

  const ExpExpParams& params() const { return params_; }

  QuadResult unnormalized_psi(double x) const;
  double psi_ratio(double x, double x_ref) const;
  /// λ / (1 + λ I(0)) · I(x): the absolute ruin probability.
  double psi(double x) const;

  /// D(y) = ∫_0^y (μ/λ − 1/v(z)) dz ≥ 0, so the integrand is e^{−λD(y)}/v(y).
  double deficit(double y) const;
  double integrand(double y) const;

 private:
  TailRemainder tail(double y) const;
  double tail_start() const;
  void extend_cache(double y) const;

  ExpExpParams params_;
  double c_;  // λ/μ
  mutable std::vector<double> grid_;
  mutable std::vector<double> grid_deficit_;
};

QuadResult unnormalized_psi(const ExpExpParams& params, double x);
double psi_ratio(const ExpExpParams& params, double x, double x_ref);

/// I(x) for CriticalInverse in closed form (no quadrature).
double unnormalized_psi_inverse_exact(const ExpExpParams& params, double x);

struct PowerShape {
  double power;  // ψ ≍ C x^−power
};

struct StretchedShape {
  double prefactor_exponent;  // α
  double stretch_exponent;    // 1 − α
  double c2;                  // θμ²/(λ(1 − α))
  bool log_corrected;         // 1/α integer
};

using AsymptoticShape = std::variant<PowerShape, StretchedShape>;

AsymptoticShape asymptotic_shape(const ExpExpParams& params);

}  // namespace ruin
