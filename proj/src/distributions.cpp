#include "ruin/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "ruin/error.hpp"

namespace ruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Marsaglia-Tsang; shape < 1 handled by the U^{1/a} boost.
double sample_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

Distribution::Distribution(Family family) : family_(family) {
  std::visit(overloaded{
                 [](const Exponential& d) {
                   if (!positive_finite(d.rate)) throw ModelError("exponential rate must be positive");
                 },
                 [](const GammaDist& d) {
                   if (!positive_finite(d.shape) || !positive_finite(d.rate))
                     throw ModelError("gamma shape and rate must be positive");
                 },
                 [](const ParetoType& d) {
                   if (!positive_finite(d.beta)) throw ModelError("pareto beta must be positive");
                   if (!positive_finite(d.scale)) throw ModelError("pareto scale must be positive");
                 },
                 [](const Deterministic& d) {
                   if (!std::isfinite(d.value) || d.value < 0.0)
                     throw ModelError("deterministic value must be non-negative");
                 },
             },
             family_);
}

bool Distribution::has_moment(double k) const {
  if (const auto* p = std::get_if<ParetoType>(&family_)) return k < 2.0 + p->beta;
  return true;
}

double Distribution::moment(int k) const {
  if (k < 0) throw ModelError("negative moment order");
  if (k == 0) return 1.0;
  return std::visit(
      overloaded{
          [k](const Exponential& d) { return factorial(k) / std::pow(d.rate, k); },
          [k](const GammaDist& d) {
            // Gamma(a+k)/Gamma(a) = a(a+1)...(a+k-1)
            double r = 1.0;
            for (int i = 0; i < k; ++i) r *= (d.shape + i) / d.rate;
            return r;
          },
          [k](const ParetoType& d) {
            const double a = 2.0 + d.beta;
            if (k >= a) return kInf;
            // scale^k k! Gamma(a-k)/Gamma(a) = scale^k k! / ((a-1)(a-2)...(a-k))
            double r = 1.0;
            for (int i = 1; i <= k; ++i) r *= i * d.scale / (a - i);
            return r;
          },
          [k](const Deterministic& d) { return std::pow(d.value, k); },
      },
      family_);
}

double Distribution::variance() const {
  const double m1 = moment(1);
  const double m2 = moment(2);
  if (!std::isfinite(m2)) return kInf;
  if (const auto* g = std::get_if<GammaDist>(&family_)) return g->shape / (g->rate * g->rate);
  if (const auto* e = std::get_if<Exponential>(&family_)) return 1.0 / (e->rate * e->rate);
  if (std::holds_alternative<Deterministic>(family_)) return 0.0;
  return m2 - m1 * m1;
}

double Distribution::tail(double x) const {
  if (x < 0.0) return 1.0;
  return std::visit(overloaded{
                        [x](const Exponential& d) { return std::exp(-d.rate * x); },
                        [x](const GammaDist& d) { return boost::math::gamma_q(d.shape, d.rate * x); },
                        [x](const ParetoType& d) { return std::pow(1.0 + x / d.scale, -(2.0 + d.beta)); },
                        [x](const Deterministic& d) { return x < d.value ? 1.0 : 0.0; },
                    },
                    family_);
}

bool Distribution::bounded() const { return std::holds_alternative<Deterministic>(family_); }

double Distribution::sample(RngStream& rng) const {
  return std::visit(overloaded{
                        [&rng](const Exponential& d) { return rng.exponential(d.rate); },
                        [&rng](const GammaDist& d) { return sample_gamma(d.shape, rng) / d.rate; },
                        [&rng](const ParetoType& d) {
                          return d.scale * std::expm1(-std::log(rng.uniform()) / (2.0 + d.beta));
                        },
                        [](const Deterministic& d) { return d.value; },
                    },
                    family_);
}

double Distribution::sample_below(double upper, RngStream& rng) const {
  if (upper < 0.0) throw ModelError("sample_below: empty conditioning set");
  return std::visit(
      overloaded{
          [&](const Exponential& d) {
            // F(upper) = -expm1(-rate*upper); invert F(x) = u F(upper)
            const double mass = -std::expm1(-d.rate * upper);
            return std::min(upper, -std::log1p(-rng.uniform() * mass) / d.rate);
          },
          [&](const GammaDist& d) {
            const double mass = boost::math::gamma_p(d.shape, d.rate * upper);
            if (!(mass > 0.0)) return 0.0;
            return std::min(upper, boost::math::gamma_p_inv(d.shape, rng.uniform() * mass) / d.rate);
          },
          [&](const ParetoType& d) {
            const double a = 2.0 + d.beta;
            const double t_up = std::pow(1.0 + upper / d.scale, -a);
            // survival value uniform on [t_up, 1]
            const double s = 1.0 - rng.uniform() * (1.0 - t_up);
            return std::min(upper, d.scale * std::expm1(-std::log(s) / a));
          },
          [&](const Deterministic& d) {
            if (d.value > upper) throw ModelError("sample_below: empty conditioning set");
            return d.value;
          },
      },
      family_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const Exponential& d) { os << "Exponential(rate=" << d.rate << ")"; },
                 [&os](const GammaDist& d) { os << "Gamma(shape=" << d.shape << ", rate=" << d.rate << ")"; },
                 [&os](const ParetoType& d) { os << "ParetoType(beta=" << d.beta << ", scale=" << d.scale << ")"; },
                 [&os](const Deterministic& d) { os << "Deterministic(" << d.value << ")"; },
             },
             family_);
  return os.str();
}

}  // namespace ruin
