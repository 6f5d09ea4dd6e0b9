#include "ruin/flow.hpp"

#include <algorithm>
#include <cmath>

#include "ruin/error.hpp"
#include "ruin/risk_model.hpp"

namespace ruin {
namespace {

void check_args(double x, double t) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ModelError("flow: level must be finite and non-negative");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ModelError("flow: time must be finite and non-negative");
}

// Newton on G(d) = d/a - (θ/a²) log1p(a d / (a x + θ)) - t. G is convex and
// increasing; the start is the second-order Taylor value clamped into the
// bracket [t v(x + v(x) t), v(x) t]. Convergence is quadratic with d G''/G' <= 1,
// so a relative step of 1e-7 leaves an error near rounding.
bool inverse_newton(double a, double theta, double x, double t, double& d_out) {
  const double base = a * x + theta;
  const double v = a + theta / x;
  const double hi = v * t;
  const double lo = t * (a + theta / (x + hi));
  double d = std::clamp(hi - 0.5 * v * theta * t * t / (x * x), lo, hi);
  for (int it = 0; it < 60; ++it) {
    const double g = d / a - theta / (a * a) * std::log1p(a * d / base) - t;
    const double y = x + d;
    const double step = g * (a * y + theta) / y;
    const double next = std::max(d - step, 0.5 * d);
    if (std::abs(step) <= 1e-7 * d) {
      d_out = next;
      return true;
    }
    d = next;
  }
  return false;
}

}  // namespace

FlowSolver::FlowSolver(PremiumRate rate, FlowMethod method) : rate_(std::move(rate)), method_(method) {
  const auto& k = rate_.kind();
  const bool constant = std::holds_alternative<ConstantRate>(k);
  const bool inverse = std::holds_alternative<CriticalInverse>(k);
  const bool table = std::holds_alternative<Tabulated>(k);
  if (const auto* rk = std::get_if<RungeKutta>(&method_)) {
    if (!(rk->rel_tol > 0.0)) throw ModelError("flow: rel_tol must be positive");
    rk_opts_ = *rk;
    route_ = Route::Rk4;
  } else if (std::holds_alternative<ImplicitSeparable>(method_)) {
    if (constant)
      route_ = Route::Constant;
    else if (inverse)
      route_ = Route::Inverse;
    else
      throw ModelError("flow: implicit separable solution needs a Constant or CriticalInverse rate");
  } else if (std::holds_alternative<Analytic>(method_)) {
    if (constant)
      route_ = Route::Constant;
    else if (table)
      route_ = Route::Tabulated;
    else
      throw ModelError("flow: analytic solution needs a Constant or Tabulated rate");
  } else {
    route_ = constant ? Route::Constant : inverse ? Route::Inverse : table ? Route::Tabulated : Route::Rk4;
  }
  if (route_ == Route::Rk4 && table) throw ModelError("flow: RK4 is not used on discontinuous tabulated rates");
}

double FlowSolver::operator()(double x, double t) const {
  check_args(x, t);
  if (t == 0.0) return x;
  switch (route_) {
    case Route::Constant:
      return x + std::get<ConstantRate>(rate_.kind()).v * t;
    case Route::Inverse:
      return inverse(x, t);
    case Route::Tabulated:
      return tabulated(x, t);
    case Route::Rk4:
      break;
  }
  return runge_kutta(x, t, rk_opts_);
}

double FlowSolver::inverse(double x, double t) const {
  const auto& c = std::get<CriticalInverse>(rate_.kind());
  if (x < c.z_min) {
    const double v0 = c.v_c + c.theta / c.z_min;
    const double t0 = (c.z_min - x) / v0;
    if (t <= t0) return x + v0 * t;
    t -= t0;
    x = c.z_min;
  }
  if (c.theta == 0.0) return x + c.v_c * t;
  double d = 0.0;
  if (inverse_newton(c.v_c, c.theta, x, t, d)) return x + d;
  return rk4_smooth(x, t, RungeKutta{});
}

double FlowSolver::tabulated(double x, double t) const {
  const auto& bp = std::get<Tabulated>(rate_.kind()).breakpoints;
  auto it = std::upper_bound(bp.begin(), bp.end(), x, [](double lv, const auto& p) { return lv < p.first; });
  double z = x;
  while (t > 0.0) {
    const double r = (it == bp.begin()) ? bp.front().second : std::prev(it)->second;
    if (r == 0.0 || it == bp.end()) return z + r * t;
    const double dt = (it->first - z) / r;
    if (dt >= t) return z + r * t;
    t -= dt;
    z = it->first;
    ++it;
  }
  return z;
}

double FlowSolver::runge_kutta(double x, double t, RungeKutta opts) const {
  check_args(x, t);
  if (t == 0.0) return x;
  const double zf = rate_.z_min();
  if (x < zf) {
    const double v0 = rate_(zf);
    const double t0 = (zf - x) / v0;
    if (t <= t0) return x + v0 * t;
    t -= t0;
    x = zf;
  }
  return rk4_smooth(x, t, opts);
}

double FlowSolver::rk4_smooth(double x, double t, const RungeKutta& opts) const {
  const double h_max = opts.h_max > 0.0 ? opts.h_max : std::min(t, 0.01 * x + 0.01);
  const auto f = [this](double z) { return rate_(z); };
  const auto step = [&f](double y, double h) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  double y = x;
  double s = 0.0;
  double h = h_max;
  int guard = 0;
  while (s < t) {
    if (++guard > 10000000) throw NumericalError("flow: RK4 step budget exhausted");
    h = std::min({h, h_max, t - s});
    const double full = step(y, h);
    const double half = step(step(y, 0.5 * h), 0.5 * h);
    const double err = std::abs(half - full) / 15.0;
    const double tol = opts.rel_tol * std::abs(half - y) + 1e-15;
    if (err <= tol || h <= 1e-14 * std::max(1.0, t)) {
      y = half + (half - full) / 15.0;
      s += h;
      const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
      h *= std::clamp(grow, 1.0, 4.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
    }
  }
  return y;
}

std::pair<double, double> flow_increment_bounds(const RiskModel& model, double x, double t) {
  check_args(x, t);
  const PremiumRate& rate = model.rate();
  if (!rate.is_critical()) throw ModelError("flow_increment_bounds: critical rate family required");
  const double v_c = *rate.critical_limit();
  const double theta = *rate.theta();
  const double alpha = *rate.alpha();
  const double zf = rate.z_min();
  const Envelope env = rate.envelope().value_or(Envelope{0.0, 1.5});
  const auto base = [&](double z) { return v_c + theta / std::pow(std::max(z, zf), alpha); };
  const double upper = t * (base(x) + env(x));
  const double z = x + upper;
  const double lower = std::max(0.0, t * (base(z) - env(z)));
  return {lower, upper};
}

}  // namespace ruin
