#include "ruin/closed_form.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "ruin/error.hpp"

namespace ruin {
namespace {

const char* kRecurrent = "recurrent: psi == 1";

double gk15(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0);
}

}  // namespace

ExpExpOracle::ExpExpOracle(ExpExpParams params) : params_(std::move(params)) {
  if (!(params_.lambda > 0.0) || !(params_.mu > 0.0)) throw ModelError("exp/exp: lambda and mu must be positive");
  c_ = params_.lambda / params_.mu;
  if (auto lim = params_.rate.critical_limit()) {
    if (std::abs(*lim - c_) > 1e-12 * c_) throw ModelError("exp/exp: critical rate must equal lambda/mu");
  }
  const double lam = params_.lambda;
  const auto& k = params_.rate.kind();
  if (const auto* cr = std::get_if<ConstantRate>(&k)) {
    if (!(cr->v > c_)) throw NumericalError(kRecurrent);
  } else if (const auto* ci = std::get_if<CriticalInverse>(&k)) {
    if (!(lam * ci->theta / (c_ * c_) > 1.0)) throw NumericalError(kRecurrent);
  } else if (const auto* cp = std::get_if<CriticalPower>(&k)) {
    if (!(cp->theta > 0.0)) throw NumericalError(kRecurrent);
  } else {
    const auto& bp = std::get<Tabulated>(k).breakpoints;
    if (!(bp.back().second > c_)) throw NumericalError(kRecurrent);
  }
}

void ExpExpOracle::extend_cache(double y) const {
  const auto& cp = std::get<CriticalPower>(params_.rate.kind());
  const double c = c_;
  const auto g = [&cp, c](double z) { return cp.theta / (c * (c * std::pow(z, cp.alpha) + cp.theta)); };
  if (grid_.empty()) {
    grid_.push_back(cp.z_min);
    grid_deficit_.push_back(cp.z_min * (1.0 / c - 1.0 / params_.rate(0.0)));
  }
  while (grid_.back() < y) {
    const double a = grid_.back();
    const double b = a * 1.0905077326652577;  // 2^(1/8)
    grid_deficit_.push_back(grid_deficit_.back() + gk15(g, a, b));
    grid_.push_back(b);
  }
}

double ExpExpOracle::deficit(double y) const {
  const double c = c_;
  const auto& k = params_.rate.kind();
  if (const auto* cr = std::get_if<ConstantRate>(&k)) return y * (1.0 / c - 1.0 / cr->v);
  if (const auto* ci = std::get_if<CriticalInverse>(&k)) {
    const double v0 = c + ci->theta / ci->z_min;
    if (y <= ci->z_min) return y * (1.0 / c - 1.0 / v0);
    return ci->z_min * (1.0 / c - 1.0 / v0) +
           ci->theta / (c * c) * std::log1p(c * (y - ci->z_min) / (c * ci->z_min + ci->theta));
  }
  if (const auto* cp = std::get_if<CriticalPower>(&k)) {
    const double v0 = params_.rate(0.0);
    if (y <= cp->z_min) return y * (1.0 / c - 1.0 / v0);
    extend_cache(y);
    auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
    const auto i = static_cast<std::size_t>(std::distance(grid_.begin(), it)) - 1;
    const auto g = [cp, c](double z) { return cp->theta / (c * (c * std::pow(z, cp->alpha) + cp->theta)); };
    return grid_deficit_[i] + (y > grid_[i] ? gk15(g, grid_[i], y) : 0.0);
  }
  const auto& bp = std::get<Tabulated>(k).breakpoints;
  double d = 0.0;
  double z = 0.0;
  double r = bp.front().second;
  for (const auto& [level, rate] : bp) {
    if (level >= y) break;
    if (level > z) {
      d += (level - z) * (1.0 / c - 1.0 / r);
      z = level;
    }
    r = rate;
  }
  return d + (y - z) * (1.0 / c - 1.0 / r);
}

double ExpExpOracle::integrand(double y) const {
  return std::exp(-params_.lambda * deficit(y)) / params_.rate(y);
}

double ExpExpOracle::tail_start() const {
  const auto& k = params_.rate.kind();
  if (const auto* t = std::get_if<Tabulated>(&k)) return t->breakpoints.back().first;
  return params_.rate.z_min();
}

TailRemainder ExpExpOracle::tail(double y) const {
  const double lam = params_.lambda;
  const double c = c_;
  const auto& k = params_.rate.kind();
  const double e = std::exp(-lam * deficit(y));
  if (const auto* ci = std::get_if<CriticalInverse>(&k)) {
    const double s = lam * ci->theta / (c * c);
    const double w = c * y + ci->theta;
    return {e / (c * c) * (w / (s - 1.0) - ci->theta / s), 0.0};
  }
  if (const auto* cp = std::get_if<CriticalPower>(&k)) {
    // D(z) − D(y) ≥ θ/(c v(y)) ∫_y^z u^−α du and 1/v ≤ 1/c on [y, ∞).
    const double beta = 1.0 - cp->alpha;
    const double kappa = lam * cp->theta / (c * params_.rate(y) * beta);
    const double zy = kappa * std::pow(y, beta);
    const double a = 1.0 / beta;
    const double log_bound = std::log(e / c) + zy - std::log(beta) - a * std::log(kappa) +
                             std::log(boost::math::gamma_q(a, zy)) + boost::math::lgamma(a);
    const double bound = std::exp(log_bound);
    return {bound, bound};
  }
  const double v = params_.rate(y);
  return {e / (v * lam * (1.0 / c - 1.0 / v)), 0.0};
}

QuadResult ExpExpOracle::unnormalized_psi(double x) const {
  if (!(x >= 0.0)) throw ModelError("unnormalized_psi: x must be non-negative");
  const auto f = [this](double y) { return integrand(y); };
  const auto t = [this](double y) { return tail(y); };
  // Split at the kink of the rate so every panel sees a smooth integrand.
  const double kink = tail_start();
  if (x < kink && std::holds_alternative<Tabulated>(params_.rate.kind())) {
    QuadResult head;
    const auto& bp = std::get<Tabulated>(params_.rate.kind()).breakpoints;
    double lo = x;
    for (const auto& [level, rate] : bp) {
      if (level <= lo) continue;
      const QuadResult p = integrate(f, lo, level);
      head.value += p.value;
      head.error += p.error;
      lo = level;
    }
    const QuadResult rest = integrate_with_tail(f, lo, lo, t);
    return {head.value + rest.value, head.error + rest.error};
  }
  if (x < kink) {
    const QuadResult head = integrate(f, x, kink);
    const QuadResult rest = integrate_with_tail(f, kink, kink, t);
    return {head.value + rest.value, head.error + rest.error};
  }
  return integrate_with_tail(f, x, x, t);
}

double ExpExpOracle::psi_ratio(double x, double x_ref) const {
  return unnormalized_psi(x).value / unnormalized_psi(x_ref).value;
}

double ExpExpOracle::psi(double x) const {
  const double lam = params_.lambda;
  return lam * unnormalized_psi(x).value / (1.0 + lam * unnormalized_psi(0.0).value);
}

QuadResult unnormalized_psi(const ExpExpParams& params, double x) { return ExpExpOracle(params).unnormalized_psi(x); }

double psi_ratio(const ExpExpParams& params, double x, double x_ref) {
  return ExpExpOracle(params).psi_ratio(x, x_ref);
}

double unnormalized_psi_inverse_exact(const ExpExpParams& params, double x) {
  const auto* ci = std::get_if<CriticalInverse>(&params.rate.kind());
  if (!ci) throw ModelError("unnormalized_psi_inverse_exact: CriticalInverse rate required");
  const double lam = params.lambda;
  const double c = lam / params.mu;
  const double s = lam * ci->theta / (c * c);
  if (!(s > 1.0)) throw NumericalError(kRecurrent);
  const double v0 = c + ci->theta / ci->z_min;
  const double slope = lam / v0 - params.mu;  // exponent rate below z_min
  const double d_min = ci->z_min * (1.0 / c - 1.0 / v0);
  const auto upper = [&](double y) {
    const double w = c * y + ci->theta;
    const double w0 = c * ci->z_min + ci->theta;
    return std::exp(-lam * d_min) * std::pow(w / w0, -s) / (c * c) * (w / (s - 1.0) - ci->theta / s);
  };
  if (x >= ci->z_min) return upper(x);
  const double head = slope == 0.0 ? (ci->z_min - x) / v0
                                   : (std::exp(slope * ci->z_min) - std::exp(slope * x)) / (v0 * slope);
  return head + upper(ci->z_min);
}

AsymptoticShape asymptotic_shape(const ExpExpParams& params) {
  const auto& k = params.rate.kind();
  const double lam = params.lambda, mu = params.mu;
  if (const auto* ci = std::get_if<CriticalInverse>(&k)) return PowerShape{ci->theta * mu * mu / lam - 1.0};
  if (const auto* cp = std::get_if<CriticalPower>(&k)) {
    const double inv = 1.0 / cp->alpha;
    const bool integral = std::abs(inv - std::round(inv)) < 1e-12;
    return StretchedShape{cp->alpha, 1.0 - cp->alpha, cp->theta * mu * mu / (lam * (1.0 - cp->alpha)), integral};
  }
  throw ModelError("asymptotic_shape: critical rate family required");
}

}  // namespace ruin
