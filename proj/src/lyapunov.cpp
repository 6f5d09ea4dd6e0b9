#include "ruin/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ruin/error.hpp"
#include "ruin/parallel.hpp"

namespace ruin {
namespace {

constexpr std::uint64_t kDriftChunk = 1 << 15;
constexpr std::uint64_t kDriftTag = 0x6472696674ULL;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

using Poly = std::vector<double>;  // coefficients of u^0 … u^D

Poly mul(const Poly& a, const Poly& b) {
  Poly c(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// −m_1 + Σ_{j=2}^{γ} (−1)^j m_j q^{j−1}/j!, truncated at degree γ−1.
Poly drift_series(const std::vector<std::vector<double>>& a, const std::vector<double>& r, int gamma) {
  const std::size_t deg = static_cast<std::size_t>(gamma);  // indices 0..γ−1
  const auto m = [&](int k) {
    Poly p(deg, 0.0);
    for (int j = 0; j <= k && j < gamma; ++j) p[j] = a[k][j];
    return p;
  };
  Poly q(deg, 0.0);
  for (std::size_t j = 1; j < deg; ++j) q[j] = r[j - 1];
  Poly out = m(1);
  for (auto& c : out) c = -c;
  Poly qpow = q;  // q^{j−1}
  double fact = 1.0;
  for (int j = 2; j <= gamma; ++j) {
    fact *= j;
    const Poly term = mul(m(j), qpow);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < deg; ++i) out[i] += sign * term[i] / fact;
    qpow = mul(qpow, q);
  }
  return out;
}

}  // namespace

void LyapunovProfile::require_inverse(const char* what) const {
  if (power_) throw ModelError(std::string(what) + ": not available for the power profile");
}

double LyapunovProfile::q(double x) const {
  if (power_) {
    double s = 0.0;
    for (std::size_t j = 1; j <= power_->r.size(); ++j)
      s += power_->r[j - 1] * std::pow(power_->b_shift + x, -power_->alpha * static_cast<double>(j));
    return s;
  }
  const double c = rho_ + 1.0;
  return x <= 1.0 ? c : c / x;
}

double LyapunovProfile::Q(double x) const {
  if (power_) {
    double s = 0.0;
    const double b = power_->b_shift;
    for (std::size_t j = 1; j <= power_->r.size(); ++j) {
      const double e = 1.0 - power_->alpha * static_cast<double>(j);
      s += power_->r[j - 1] *
           (std::abs(e) < 1e-12 ? std::log((b + x) / b) : (std::pow(b + x, e) - std::pow(b, e)) / e);
    }
    return s;
  }
  const double c = rho_ + 1.0;
  return x <= 1.0 ? c * x : c * (1.0 + std::log(x));
}

double LyapunovProfile::p(double x) const {
  require_inverse("p");
  return s_ * std::pow(std::max(x, 1.0), -k_);
}

double LyapunovProfile::P(double x) const {
  require_inverse("P");
  if (x <= 1.0) return s_ * x;
  return s_ + s_ * (1.0 - std::pow(x, 1.0 - k_)) / (k_ - 1.0);
}

double LyapunovProfile::U(double x) const {
  require_inverse("U");
  const double c = rho_ + 1.0;
  const double u1 = std::exp(-c) / rho_;
  if (x >= 1.0) return std::exp(-c) / (rho_ * std::pow(x, rho_));
  x = std::max(x, 0.0);
  return u1 + (std::exp(-c * x) - std::exp(-c)) / c;
}

double LyapunovProfile::U_pm(double x, int sign) const {
  require_inverse("U_pm");
  const double c = rho_ + 1.0;
  const double a = s_ / (k_ - 1.0);
  const double sg = static_cast<double>(sign);
  const auto series = [&](double y) {
    const double lead = std::exp(-c - sg * (s_ + a));
    const double decay = std::pow(y, -(k_ - 1.0));
    double term_coef = 1.0;  // (±a)^n / n!
    double ypow = std::pow(y, -rho_);
    double sum = 0.0;
    for (int n = 0; n < 400; ++n) {
      const double t = term_coef * ypow / (rho_ + n * (k_ - 1.0));
      sum += t;
      if (n > 2 && std::abs(t) < 1e-17 * std::abs(sum)) break;
      term_coef *= sg * a / (n + 1);
      ypow *= decay;
    }
    return lead * sum;
  };
  if (x >= 1.0) return series(x);
  x = std::max(x, 0.0);
  const double kappa = c + sg * s_;
  const double head = std::abs(kappa) < 1e-300 ? (1.0 - x) : (std::exp(-kappa * x) - std::exp(-kappa)) / kappa;
  return series(1.0) + head;
}

LyapunovProfile build_profile_inverse(const RiskModel& model, double envelope_scale, double envelope_exponent) {
  if (!std::holds_alternative<CriticalInverse>(model.rate().kind()))
    throw ModelError("build_profile_inverse: CriticalInverse rate required");
  const DerivedConstants dc = derived_constants(model);
  if (!dc.rho || !(*dc.rho > 0.0)) throw ModelError("recurrent or critical");
  if (!(envelope_scale > 0.0) || envelope_scale > *dc.rho + 1.0)
    throw ModelError("build_profile_inverse: envelope scale must lie in (0, rho + 1]");
  if (!(envelope_exponent > 1.0)) throw ModelError("build_profile_inverse: envelope exponent must exceed 1");
  LyapunovProfile prof;
  prof.rho_ = *dc.rho;
  prof.s_ = envelope_scale;
  prof.k_ = envelope_exponent;
  return prof;
}

LyapunovProfile build_profile_power(const RiskModel& model) {
  const auto* cp = std::get_if<CriticalPower>(&model.rate().kind());
  if (!cp) throw ModelError("build_profile_power: CriticalPower rate required");
  LyapunovProfile prof;
  prof.power_ = r_coefficients(model, cp->theta, cp->alpha);
  prof.rho_ = prof.power_->r.front();
  return prof;
}

BoundEnvelope bound_envelope(const LyapunovProfile& profile, double x, double x_hat, double delta) {
  if (!(x > x_hat)) throw ModelError("bound_envelope: x must exceed x_hat");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ModelError("bound_envelope: delta must lie in [0, 1]");
  return {delta * profile.U_plus(x) / profile.U_plus(0.0), profile.U_minus(x) / profile.U_minus(x_hat)};
}

double calibrate_delta(const RiskModel& model, double x_hat, std::uint64_t n_paths, const PathCaps& caps,
                       std::uint64_t seed, const EstimatorOptions& options) {
  if (!(x_hat > 0.0)) throw ModelError("calibrate_delta: x_hat must be positive");
  const std::vector<double> starts{x_hat / 4.0, x_hat / 2.0, x_hat};
  const auto curve = ruin_curve(model, starts, n_paths, caps, seed, options);
  double delta = 1.0;
  for (const auto& e : curve) delta = std::min(delta, e.p_hat - e.half_width);
  return std::max(delta, 0.0);
}

DriftReport drift_check(const LyapunovProfile& profile, const RiskModel& model, const std::vector<double>& xs,
                        std::uint64_t n_draws, std::uint64_t seed, unsigned threads, bool control_variates) {
  if (n_draws < 10000) throw ModelError("drift_check: need at least 1e4 draws per level");
  DriftReport rep;
  const DerivedConstants dc = derived_constants(model);
  const bool quadratic = model.xi().has_moment(4) && model.tau().has_moment(4);
  rep.control_variates = control_variates;
  if (control_variates && !quadratic)
    rep.warnings.emplace_back("fourth moments infinite: control variate uses the linear term only");

  for (std::size_t g = 0; g < xs.size(); ++g) {
    const double x = xs[g];
    if (!(x >= 0.0)) throw ModelError("drift_check: levels must be non-negative");
    const double eqm = std::exp(-profile.Q_minus(x));
    const double eqp = std::exp(-profile.Q_plus(x));
    const double um = profile.U_minus(x), up = profile.U_plus(x);
    const double d1m = -eqm, d2m = profile.q_minus(x) * eqm;
    const double d1p = -eqp, d2p = profile.q_plus(x) * eqp;
    struct Sums {
      double m = 0, mm = 0, p = 0, pp = 0;
    };
    auto body = [&](std::uint64_t b, std::uint64_t e) {
      Sums s;
      RngStream rng(seed, derive_stream(derive_stream(b / kDriftChunk, kDriftTag), g));
      for (std::uint64_t i = b; i < e; ++i) {
        const double tau = model.tau().sample(rng);
        const double xi = model.xi().sample(rng);
        const double jump = model.flow()(x, tau) - x - xi;
        double dm = profile.U_minus(x + jump) - um;
        double dp = profile.U_plus(x + jump) - up;
        if (control_variates) {
          const double y = dc.v_c * tau - xi;
          const double y2 = quadratic ? (y * y - dc.b) : 0.0;
          dm -= d1m * y + 0.5 * d2m * y2;
          dp -= d1p * y + 0.5 * d2p * y2;
        }
        s.m += dm;
        s.mm += dm * dm;
        s.p += dp;
        s.pp += dp * dp;
      }
      return s;
    };
    auto fold = [](Sums a, Sums b) { return Sums{a.m + b.m, a.mm + b.mm, a.p + b.p, a.pp + b.pp}; };
    const Sums s = parallel_reduce<Sums>(n_draws, kDriftChunk, threads, body, fold);
    const double n = static_cast<double>(n_draws);
    DriftLevel lv{};
    lv.x = x;
    lv.drift_minus = s.m / n;
    lv.se_minus = std::sqrt(std::max(0.0, s.mm / n - lv.drift_minus * lv.drift_minus) / n);
    lv.drift_plus = s.p / n;
    lv.se_plus = std::sqrt(std::max(0.0, s.pp / n - lv.drift_plus * lv.drift_plus) / n);
    lv.scale_minus = profile.p(x) * eqm;
    lv.scale_plus = profile.p(x) * eqp;
    rep.levels.push_back(lv);
  }

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const DriftLevel& lv = rep.levels[*it];
    const bool ok = lv.drift_minus + 3.0 * lv.se_minus <= 0.0 && lv.drift_plus - 3.0 * lv.se_plus >= 0.0;
    if (!ok) break;
    rep.x_hat = lv.x;
  }
  if (!rep.x_hat) rep.warnings.emplace_back("no grid level shows both drift signs at 3 sigma; x_hat unset");
  return rep;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Transient: return "Transient";
    case Classification::Recurrent: return "Recurrent";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "?";
}

ClassifyResult classify(const RiskModel& model) {
  const DerivedConstants dc = derived_constants(model);
  ClassifyResult r{Classification::Inconclusive, model.theta(), dc.threshold, dc.rho, {}};
  const auto& kind = model.rate().kind();
  if (std::holds_alternative<CriticalInverse>(kind)) {
    if (r.theta > r.threshold) {
      r.kind = Classification::Transient;
      r.message = "Transient (theta=" + fmt(r.theta) + " > threshold=" + fmt(r.threshold) + ", rho=" + fmt(*dc.rho) + ")";
    } else if (r.theta < r.threshold) {
      r.kind = Classification::Recurrent;
      r.message = "Recurrent (theta=" + fmt(r.theta) + " < threshold=" + fmt(r.threshold) + ")";
    } else {
      r.message = "Inconclusive (theta=" + fmt(r.theta) + " equals threshold=" + fmt(r.threshold) + ")";
    }
  } else if (std::holds_alternative<CriticalPower>(kind) && r.theta > 0.0) {
    r.kind = Classification::Transient;
    r.message = "Transient (theta/x^alpha dominates every theta'/x; threshold=" + fmt(r.threshold) + ")";
  } else {
    r.message = "Inconclusive (rate family not covered by the criterion)";
  }
  return r;
}

std::vector<std::vector<double>> a_coefficients(const RiskModel& model, double theta, int gamma) {
  if (gamma < 1) throw ModelError("a_coefficients: gamma must be at least 1");
  const int need = gamma + 1;
  if (!model.xi().has_moment(need))
    throw ModelError("a_coefficients: E xi^" + std::to_string(need) + " is infinite");
  if (!model.tau().has_moment(need))
    throw ModelError("a_coefficients: E tau^" + std::to_string(need) + " is infinite");
  const double vc = model.v_c();
  std::vector<double> mt(gamma + 1), mx(gamma + 1);
  for (int i = 0; i <= gamma; ++i) {
    mt[i] = i == 0 ? 1.0 : model.tau().moment(i);
    mx[i] = i == 0 ? 1.0 : model.xi().moment(i);
  }
  std::vector<std::vector<double>> a(gamma + 1, std::vector<double>(gamma + 1, 0.0));
  for (int k = 0; k <= gamma; ++k) {
    for (int j = 0; j <= k; ++j) {
      double e = 0.0;
      const int rest = k - j;
      for (int i = 0; i <= rest; ++i) {
        const double sign = ((rest - i) % 2 == 0) ? 1.0 : -1.0;
        e += binomial(rest, i) * std::pow(vc, i) * mt[j + i] * sign * mx[rest - i];
      }
      a[k][j] = binomial(k, j) * std::pow(theta, j) * e;
    }
  }
  return a;
}

PowerCase r_coefficients(const RiskModel& model, double theta, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ModelError("r_coefficients: alpha must lie in (0, 1)");
  PowerCase pc;
  pc.alpha = alpha;
  pc.gamma = static_cast<int>(std::floor(1.0 / alpha)) + 1;
  while (alpha * (pc.gamma - 1) > 1.0) --pc.gamma;
  const auto a = a_coefficients(model, theta, pc.gamma);
  if (!(a[2][0] > 0.0)) throw ModelError("r_coefficients: degenerate jumps (b = 0)");
  pc.r.assign(pc.gamma - 1, 0.0);
  for (int l = 1; l < pc.gamma; ++l) {
    pc.r[l - 1] = 0.0;
    const double c = drift_series(a, pc.r, pc.gamma)[l];
    pc.r[l - 1] = -c / (a[2][0] / 2.0);
  }
  const Poly res = drift_series(a, pc.r, pc.gamma);
  pc.residuals.assign(res.begin() + 1, res.end());
  pc.log_corrected = std::abs(alpha - 1.0 / (pc.gamma - 1)) < 1e-12;

  // Smallest integer shift making q non-increasing on a log grid, then doubled.
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 2200; ++i) grid.push_back(std::pow(10.0, -3.0 + i * 0.005));
  const auto decreasing = [&](double b) {
    for (double x : grid) {
      double s = 0.0;
      for (std::size_t j = 1; j <= pc.r.size(); ++j)
        s += pc.r[j - 1] * static_cast<double>(j) * std::pow(b + x, -alpha * static_cast<double>(j));
      if (s < 0.0) return false;
    }
    return true;
  };
  double b = 1.0;
  while (!decreasing(b)) {
    b += 1.0;
    if (b > 1e7) throw NumericalError("r_coefficients: no shift makes q non-increasing");
  }
  pc.b_shift = 2.0 * b;
  return pc;
}

double power_case_shape(const PowerCase& pc, double x) {
  const double al = pc.alpha;
  const int top = pc.log_corrected ? pc.gamma - 2 : pc.gamma - 1;
  double expo = 0.0;
  for (int j = 1; j <= top; ++j) expo += pc.r[j - 1] * std::pow(x, 1.0 - al * j) / (1.0 - al * j);
  const double prefactor = pc.log_corrected ? std::pow(x, al - pc.r[pc.gamma - 2]) : std::pow(x, al);
  return prefactor * std::exp(-expo);
}

}  // namespace ruin
