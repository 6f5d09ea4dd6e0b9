#include "ruin/heavy_tail.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <limits>

#include "ruin/error.hpp"
#include "ruin/parallel.hpp"
#include "ruin/quadrature.hpp"

namespace ruin {
namespace {

constexpr std::uint64_t kLeftTag = 0x6c656674ULL;
constexpr std::uint64_t kTruncTag = 0x7472756e63ULL;
constexpr std::uint64_t kGTag = 0x67746162ULL;
constexpr std::uint64_t kProbeTag = 0x70726f6265ULL;
constexpr std::uint64_t kChunk = 1 << 14;

/// Mean and standard error of P{ξ > V_y(τ) − y + shift} over τ draws.
std::pair<double, double> conditional_tail(const RiskModel& model, double y, double shift, std::uint64_t n,
                                           std::uint64_t seed, std::uint64_t tag, unsigned threads) {
  struct S {
    double s = 0, ss = 0;
  };
  auto body = [&](std::uint64_t b, std::uint64_t e) {
    S acc;
    RngStream rng(seed, derive_stream(b / kChunk, tag));
    for (std::uint64_t i = b; i < e; ++i) {
      const double v = model.flow()(y, model.tau().sample(rng)) - y;
      const double t = model.xi().tail(v + shift);
      acc.s += t;
      acc.ss += t * t;
    }
    return acc;
  };
  const S tot = parallel_reduce<S>(n, kChunk, threads, body, [](S a, S b) { return S{a.s + b.s, a.ss + b.ss}; });
  const double dn = static_cast<double>(n);
  const double m = tot.s / dn;
  return {m, std::sqrt(std::max(0.0, tot.ss / dn - m * m) / dn)};
}

}  // namespace

double karamata_integral(const Distribution& xi, double x, KaramataMethod method) {
  if (!(x >= 0.0)) throw ModelError("karamata_integral: x must be non-negative");
  const auto& fam = xi.family();
  if (method == KaramataMethod::Quadrature) {
    const auto f = [&xi](double y) { return y * xi.tail(y); };
    if (const auto* p = std::get_if<ParetoType>(&fam)) {
      const double a = 2.0 + p->beta;
      // (1 + y/s)^−a ≤ (y/s)^−a gives a one-sided remainder.
      const auto rem = [p, a](double y) {
        const double b = std::pow(p->scale, a) * std::pow(y, 2.0 - a) / (a - 2.0);
        return TailRemainder{b, b};
      };
      return integrate_with_tail(f, x, std::max(x, 1.0), rem, 1e-12, 1e-11).value;
    }
    if (const auto* e = std::get_if<Exponential>(&fam)) {
      const double m = e->rate;
      const auto rem = [m](double y) { return TailRemainder{std::exp(-m * y) * (y / m + 1.0 / (m * m)), 0.0}; };
      return integrate_with_tail(f, x, x, rem).value;
    }
    throw ModelError("karamata_integral: quadrature supports Pareto-type and exponential claims");
  }
  if (const auto* p = std::get_if<ParetoType>(&fam)) {
    if (!(p->beta > 0.0)) throw ModelError("karamata_integral: beta must be positive");
    const double a = 2.0 + p->beta;
    const double u0 = 1.0 + x / p->scale;
    return p->scale * p->scale * (std::pow(u0, 2.0 - a) / (a - 2.0) - std::pow(u0, 1.0 - a) / (a - 1.0));
  }
  if (const auto* e = std::get_if<Exponential>(&fam)) {
    const double m = e->rate;
    return std::exp(-m * x) * (x / m + 1.0 / (m * m));
  }
  if (const auto* g = std::get_if<GammaDist>(&fam)) {
    const double k = g->shape, r = g->rate;
    return 0.5 * (k * (k + 1.0) / (r * r) * boost::math::gamma_q(k + 2.0, r * x) -
                  x * x * boost::math::gamma_q(k, r * x));
  }
  const double d = std::get<Deterministic>(fam).value;
  return x < d ? 0.5 * (d * d - x * x) : 0.0;
}

std::pair<double, double> heavy_regime(const RiskModel& model) {
  const auto* p = std::get_if<ParetoType>(&model.xi().family());
  if (!p) throw ModelError("heavy regime needs Pareto-type claims");
  const DerivedConstants dc = derived_constants(model);
  if (!dc.rho) throw ModelError("heavy regime needs a CriticalInverse rate");
  if (p->beta >= *dc.rho) throw ModelError("light-tail regime: use lyapunov_bounds");
  return {p->beta, *dc.rho};
}

HeavyCalibration calibrate_heavy(const RiskModel& model, const std::vector<HeavyAnchor>& anchors) {
  heavy_regime(model);
  if (anchors.empty()) throw ModelError("calibrate_heavy: need at least one anchor");
  HeavyCalibration c{anchors, std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& a : anchors) {
    const double shape = a.x * a.x * model.xi().tail(a.x);
    c.c_low = std::min(c.c_low, std::max(0.0, a.p_hat - a.half_width) / shape);
    c.c_high = std::max(c.c_high, (a.p_hat + a.half_width) / shape);
  }
  return c;
}

HeavyEnvelope heavy_envelope(const RiskModel& model, double x, const HeavyCalibration& calibration) {
  heavy_regime(model);
  if (!(x > 0.0)) throw ModelError("heavy_envelope: x must be positive");
  const double shape = x * x * model.xi().tail(x);
  return {calibration.c_low * shape, calibration.c_high * shape, shape};
}

std::vector<LeftTailRow> left_tail_check(const RiskModel& model, double x, const std::vector<double>& ys,
                                         std::uint64_t n_draws, std::uint64_t seed, unsigned threads) {
  if (n_draws < 1000) throw ModelError("left_tail_check: need at least 1000 draws");
  std::vector<LeftTailRow> rows;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    const auto [m, se] = conditional_tail(model, x, y, n_draws, seed, derive_stream(i, kLeftTag), threads);
    const double t = model.xi().tail(y);
    rows.push_back({y, m / t, se / t});
  }
  return rows;
}

double truncated_jump(const RiskModel& model, double x, RngStream& rng) {
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const double v = model.flow()(x, model.tau().sample(rng));
    const double limit = v - 0.5 * x;
    const double big = model.xi().tail(limit);
    if (big < 1.0 && rng.uniform() < 1.0 - big) return v - x - model.xi().sample_below(limit, rng);
  }
  throw NumericalError("truncated_jump: acceptance probability below 1e-3");
}

double truncated_jump_rejection(const RiskModel& model, double x, RngStream& rng) {
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const double j = sample_jump(model, x, rng);
    if (j >= -0.5 * x) return j;
  }
  throw NumericalError("truncated_jump_rejection: acceptance probability below 1e-3");
}

TruncatedChainStats truncated_diagnostics(const RiskModel& model, double x, std::uint64_t n_paths,
                                          const PathCaps& caps, std::uint64_t seed, const EstimatorOptions& options,
                                          std::size_t grid_points, std::uint64_t g_draws) {
  heavy_regime(model);
  if (!(x >= 1.0)) throw ModelError("truncated_diagnostics: x must be at least 1");
  if (grid_points < 2) throw ModelError("truncated_diagnostics: need at least 2 grid points");
  TruncatedChainStats st;

  std::vector<double> grid(grid_points);
  const double top = std::max(caps.level_cap, 2.0);
  for (std::size_t i = 0; i < grid_points; ++i)
    grid[i] = std::pow(top, static_cast<double>(i) / static_cast<double>(grid_points - 1));

  for (std::size_t i = 0; i < grid_points; ++i) {
    const double y = grid[i];
    const double big = conditional_tail(model, y, 0.5 * y, g_draws, seed, derive_stream(i, kGTag), options.threads).first;
    st.g_table.emplace_back(y, 1.0 - big);
    st.min_acceptance = std::min(st.min_acceptance, 1.0 - big);
  }
  if (st.min_acceptance < 1e-3) throw NumericalError("truncated_diagnostics: rejection acceptance below 1e-3");

  struct Acc {
    std::vector<double> occupation;
    double score = 0, score_sq = 0;
    std::uint64_t down = 0;
  };
  auto body = [&](std::uint64_t b, std::uint64_t e) {
    Acc acc;
    acc.occupation.assign(grid_points + 1, 0.0);
    for (std::uint64_t i = b; i < e; ++i) {
      RngStream rng(seed, derive_stream(i, kTruncTag));
      double r = x;
      double score = 0.0;
      bool down = false;
      for (std::uint64_t n = 0; n < caps.max_steps; ++n) {
        const auto bin = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), r) - grid.begin());
        acc.occupation[bin] += 1.0;
        bool first = true;
        double next = r;
        for (int attempt = 0;; ++attempt) {
          if (attempt > 1'000'000) throw NumericalError("truncated chain: acceptance below 1e-3");
          const double v = model.flow()(r, model.tau().sample(rng));
          const double limit = v - 0.5 * r;
          const double big = model.xi().tail(limit);
          if (first) {
            score += big;
            first = false;
          }
          if (big < 1.0 && rng.uniform() < 1.0 - big) {
            next = v - model.xi().sample_below(limit, rng);
            break;
          }
        }
        r = next;
        if (r <= 1.0) down = true;
        if (r > caps.level_cap) break;
      }
      acc.score += score;
      acc.score_sq += score * score;
      if (down) ++acc.down;
    }
    return acc;
  };
  auto fold = [](Acc a, Acc b) {
    if (a.occupation.empty()) return b;
    for (std::size_t i = 0; i < a.occupation.size(); ++i) a.occupation[i] += b.occupation[i];
    a.score += b.score;
    a.score_sq += b.score_sq;
    a.down += b.down;
    return a;
  };
  const Acc tot = parallel_reduce<Acc>(n_paths, 64, options.threads, body, fold);
  const double n = static_cast<double>(n_paths);

  double cum = 0.0;
  double grid_term = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double mass = tot.occupation[i] / n;
    cum += mass;
    st.renewal_mass.emplace_back(grid[i], cum);
    const double one_minus_g = i == 0 ? 1.0 : 1.0 - st.g_table[i - 1].second;
    grid_term += one_minus_g * mass;
  }
  st.big_jump_grid = grid_term;
  st.big_jump_term = tot.score / n;
  st.big_jump_se = std::sqrt(std::max(0.0, tot.score_sq / n - st.big_jump_term * st.big_jump_term) / n);
  st.down_crossing_hat = static_cast<double>(tot.down) / n;
  st.psi_tilde_hat = 0.0;
  st.psi = estimate_ruin(model, x, n_paths, caps, seed, options);
  st.slack = st.psi_tilde_hat + st.big_jump_term - st.psi.p_hat;
  st.slack_se = std::sqrt(st.big_jump_se * st.big_jump_se + std::pow(st.psi.half_width / 1.96, 2));
  return st;
}

LowerBoundProbe lower_bound_probe(const RiskModel& model, double x, double delta, std::uint64_t n_paths,
                                  std::uint64_t seed, unsigned threads, std::uint64_t c_draws) {
  if (!(x > 0.0) || !(delta > 0.0)) throw ModelError("lower_bound_probe: x and delta must be positive");
  if (n_paths < 1) throw ModelError("lower_bound_probe: need at least one path");
  LowerBoundProbe pr{};
  pr.horizon = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(delta * x * x)));
  auto body = [&](std::uint64_t b, std::uint64_t e) {
    std::uint64_t kept = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      RngStream rng(seed, derive_stream(i, kProbeTag));
      double r = x;
      bool inside = true;
      for (std::uint64_t k = 0; k < pr.horizon && inside; ++k) {
        r += sample_jump(model, r, rng);
        inside = r >= 0.5 * x && r <= 2.0 * x;
      }
      if (inside) ++kept;
    }
    return kept;
  };
  const auto kept = parallel_reduce<std::uint64_t>(n_paths, 256, threads, body, std::plus<>{});
  const double n = static_cast<double>(n_paths);
  pr.confinement = static_cast<double>(kept) / n;
  pr.confinement_se = std::sqrt(pr.confinement * (1.0 - pr.confinement) / n);
  pr.c_hat = 1.0;
  std::uint64_t tag = 0;
  for (double y : {0.5 * x, x, 2.0 * x}) {
    const double c = conditional_tail(model, y, 2.0 * x, c_draws, seed, derive_stream(tag++, kProbeTag ^ 1), threads).first;
    pr.c_hat = std::min(pr.c_hat, c);
  }
  pr.lower = pr.c_hat * static_cast<double>(pr.horizon) * pr.confinement;
  pr.normalized = pr.lower / (x * x * model.xi().tail(x));
  return pr;
}

}  // namespace ruin
