#include "ruin/premium_rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ruin/error.hpp"

namespace ruin {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const char* what) {
  if (!ok) throw ModelError(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

double Envelope::operator()(double z) const {
  if (scale == 0.0) return 0.0;
  return scale * std::pow(std::max(z, 1.0), -exponent);
}

double Envelope::integral(double z) const {
  if (scale == 0.0 || z <= 0.0) return 0.0;
  if (z <= 1.0) return scale * z;
  return scale * (1.0 + (1.0 - std::pow(z, 1.0 - exponent)) / (exponent - 1.0));
}

double Envelope::total() const {
  if (scale == 0.0) return 0.0;
  return scale * (1.0 + 1.0 / (exponent - 1.0));
}

PremiumRate::PremiumRate(Kind kind, std::optional<Envelope> envelope)
    : kind_(std::move(kind)), envelope_(envelope) {
  std::visit(overloaded{
                 [this](const ConstantRate& c) {
                   require(finite_nonneg(c.v), "constant rate must be finite and non-negative");
                   sup_ = inf_ = c.v;
                 },
                 [this](const CriticalInverse& c) {
                   require(std::isfinite(c.v_c) && c.v_c > 0.0, "v_c must be positive");
                   require(finite_nonneg(c.theta), "theta must be non-negative");
                   require(std::isfinite(c.z_min) && c.z_min > 0.0, "z_min must be positive");
                   sup_ = c.v_c + c.theta / c.z_min;
                   inf_ = c.v_c;
                 },
                 [this](const CriticalPower& c) {
                   require(std::isfinite(c.v_c) && c.v_c > 0.0, "v_c must be positive");
                   require(finite_nonneg(c.theta), "theta must be non-negative");
                   require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
                   require(std::isfinite(c.z_min) && c.z_min > 0.0, "z_min must be positive");
                   sup_ = c.v_c + c.theta / std::pow(c.z_min, c.alpha);
                   inf_ = c.v_c;
                 },
                 [this](Tabulated& t) {
                   require(!t.breakpoints.empty(), "tabulated rate needs at least one breakpoint");
                   for (std::size_t i = 0; i < t.breakpoints.size(); ++i) {
                     require(finite_nonneg(t.breakpoints[i].first), "breakpoint levels must be non-negative");
                     require(finite_nonneg(t.breakpoints[i].second), "tabulated rates must be non-negative");
                     if (i > 0)
                       require(t.breakpoints[i].first > t.breakpoints[i - 1].first,
                               "breakpoint levels must be strictly increasing");
                   }
                   sup_ = inf_ = t.breakpoints.front().second;
                   for (const auto& [level, v] : t.breakpoints) {
                     sup_ = std::max(sup_, v);
                     inf_ = std::min(inf_, v);
                   }
                 },
             },
             kind_);
  if (envelope_) {
    require(std::isfinite(envelope_->scale) && envelope_->scale >= 0.0, "envelope scale must be non-negative");
    require(envelope_->exponent > 1.0, "envelope exponent must exceed 1 (integrability)");
  }
}

double PremiumRate::evaluate(double z) const {
  return std::visit(overloaded{
                        [](const ConstantRate& c) { return c.v; },
                        [z](const CriticalInverse& c) { return c.v_c + c.theta / std::max(z, c.z_min); },
                        [z](const CriticalPower& c) {
                          return c.v_c + c.theta / std::pow(std::max(z, c.z_min), c.alpha);
                        },
                        [z](const Tabulated& t) {
                          auto it = std::upper_bound(t.breakpoints.begin(), t.breakpoints.end(), z,
                                                     [](double lv, const auto& bp) { return lv < bp.first; });
                          if (it == t.breakpoints.begin()) return t.breakpoints.front().second;
                          return std::prev(it)->second;
                        },
                    },
                    kind_);
}

bool PremiumRate::is_critical() const {
  return std::holds_alternative<CriticalInverse>(kind_) || std::holds_alternative<CriticalPower>(kind_);
}

std::optional<double> PremiumRate::critical_limit() const {
  if (const auto* c = std::get_if<CriticalInverse>(&kind_)) return c->v_c;
  if (const auto* c = std::get_if<CriticalPower>(&kind_)) return c->v_c;
  return std::nullopt;
}

std::optional<double> PremiumRate::theta() const {
  if (const auto* c = std::get_if<CriticalInverse>(&kind_)) return c->theta;
  if (const auto* c = std::get_if<CriticalPower>(&kind_)) return c->theta;
  return std::nullopt;
}

std::optional<double> PremiumRate::alpha() const {
  if (std::holds_alternative<CriticalInverse>(kind_)) return 1.0;
  if (const auto* c = std::get_if<CriticalPower>(&kind_)) return c->alpha;
  return std::nullopt;
}

double PremiumRate::z_min() const {
  if (const auto* c = std::get_if<CriticalInverse>(&kind_)) return c->z_min;
  if (const auto* c = std::get_if<CriticalPower>(&kind_)) return c->z_min;
  return 0.0;
}

std::string PremiumRate::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const ConstantRate& c) { os << "Constant(v=" << c.v << ")"; },
                 [&os](const CriticalInverse& c) {
                   os << "CriticalInverse(v_c=" << c.v_c << ", theta=" << c.theta << ", z_min=" << c.z_min << ")";
                 },
                 [&os](const CriticalPower& c) {
                   os << "CriticalPower(v_c=" << c.v_c << ", theta=" << c.theta << ", alpha=" << c.alpha
                      << ", z_min=" << c.z_min << ")";
                 },
                 [&os](const Tabulated& t) { os << "Tabulated(" << t.breakpoints.size() << " breakpoints)"; },
             },
             kind_);
  return os.str();
}

}  // namespace ruin
