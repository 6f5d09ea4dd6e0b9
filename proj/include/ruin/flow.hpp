#pragma once

#include <utility>
#include <variant>

#include "ruin/premium_rate.hpp"

namespace ruin {

class RiskModel;

struct Analytic {};
struct ImplicitSeparable {};
/// h_max <= 0 selects min(t, 0.01 x + 0.01) per call.
struct RungeKutta {
  double h_max = 0.0;
  double rel_tol = 1e-10;
};
struct AutoMethod {};

using FlowMethod = std::variant<AutoMethod, Analytic, ImplicitSeparable, RungeKutta>;

/// Deterministic reserve flow V_x(t) solving V' = v(V), V(0) = x.
class FlowSolver {
 public:
  explicit FlowSolver(PremiumRate rate, FlowMethod method = AutoMethod{});

  const PremiumRate& rate() const { return rate_; }
  const FlowMethod& method() const { return method_; }

  double operator()(double x, double t) const;

  /// Always the RK4 integrator, whatever the configured method.
  double runge_kutta(double x, double t, RungeKutta opts = {}) const;

 private:
  enum class Route { Constant, Inverse, Tabulated, Rk4 };

  double inverse(double x, double t) const;
  double tabulated(double x, double t) const;
  double rk4_smooth(double x, double t, const RungeKutta& opts) const;

  PremiumRate rate_;
  FlowMethod method_;
  Route route_;
  RungeKutta rk_opts_;
};

inline double flow(const FlowSolver& solver, double x, double t) { return solver(x, t); }

/// Bracket [lower, upper] for V_x(t) − x from the decreasing sandwich
/// v_c + θ/z^α ± p(z). Critical families only.
std::pair<double, double> flow_increment_bounds(const RiskModel& model, double x, double t);

}  // namespace ruin
