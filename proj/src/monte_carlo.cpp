#include "ruin/monte_carlo.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <limits>

#include "ruin/error.hpp"
#include "ruin/parallel.hpp"

namespace ruin {
namespace {

constexpr std::uint64_t kPathChunk = 256;
constexpr std::uint64_t kGammaTag = 0x67616d6d61ULL;

enum class End { Ruined, Cap, Horizon, Killed };

struct Score {
  double value = 0.0;
  double horizon_mass = 0.0;
  End end = End::Horizon;
};

Score run_path(const RiskModel& model, double x0, const PathCaps& caps, RngStream& rng,
               const EstimatorOptions& opt) {
  const Distribution& xi = model.xi();
  const Distribution& tau = model.tau();
  const FlowSolver& flow = model.flow();
  const bool roulette = opt.roulette.has_value();
  const double keep = roulette ? *opt.roulette : 1.0;
  double next_gate = std::max(x0, 1.0) * 2.0;
  double w = 1.0;
  double r = x0;
  Score s;
  for (std::uint64_t n = 1; n <= caps.max_steps; ++n) {
    const double t = tau.sample(rng);
    const double v = flow(r, t);
    if (opt.expected_value_scoring) {
      const double pt = xi.tail(v);
      s.value += w * pt;
      if (pt >= 1.0) {
        s.end = End::Ruined;
        return s;
      }
      r = v - xi.sample_below(v, rng);
      w *= 1.0 - pt;
    } else {
      r = v - xi.sample(rng);
      if (r < 0.0) {
        s.value = w;
        s.end = End::Ruined;
        return s;
      }
    }
    if (r > caps.level_cap) {
      s.end = End::Cap;
      return s;
    }
    if (roulette) {
      while (r > next_gate) {
        next_gate *= 2.0;
        if (rng.uniform() < keep) {
          w /= keep;
        } else {
          s.end = End::Killed;
          return s;
        }
      }
    }
  }
  s.horizon_mass = w;
  s.end = End::Horizon;
  return s;
}

void finalize(RuinEstimate& e, bool clopper_pearson) {
  const double n = static_cast<double>(e.n_paths);
  if (e.weighted) {
    e.p_hat = e.sum / n;
    e.p_hat_pessimistic = std::min(1.0, e.sum_pessimistic / n);
    const double var = std::max(0.0, e.sum_sq / n - e.p_hat * e.p_hat);
    e.half_width = 1.96 * std::sqrt(var / n);
  } else {
    e.p_hat = static_cast<double>(e.ruined) / n;
    e.p_hat_pessimistic = static_cast<double>(e.ruined + e.censored_horizon) / n;
    e.half_width = 1.96 * std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  }
  e.ci_low = std::max(0.0, e.p_hat - e.half_width);
  e.ci_high = std::min(1.0, e.p_hat + e.half_width);
  if (clopper_pearson && !e.weighted) {
    const double k = static_cast<double>(e.ruined);
    constexpr double a = 0.05;
    e.ci_low = k == 0.0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1.0), a / 2);
    e.ci_high = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(k + 1.0, n - k), 1.0 - a / 2);
  }
}

void accumulate(RuinEstimate& into, const RuinEstimate& part) {
  into.n_paths += part.n_paths;
  into.ruined += part.ruined;
  into.killed += part.killed;
  into.censored_cap += part.censored_cap;
  into.censored_horizon += part.censored_horizon;
  into.sum += part.sum;
  into.sum_sq += part.sum_sq;
  into.sum_pessimistic += part.sum_pessimistic;
}

}  // namespace

PathCaps default_caps(double x) { return PathCaps{1'000'000, std::max(100.0 * x, 1e4)}; }

RuinEstimate estimate_ruin(const RiskModel& model, double x, std::uint64_t n_paths, const PathCaps& caps,
                           std::uint64_t seed, const EstimatorOptions& options) {
  if (n_paths < 1) throw ModelError("estimate_ruin: n_paths must be at least 1");
  if (!(x >= 0.0)) throw ModelError("estimate_ruin: x must be non-negative");
  if (caps.max_steps < 1) throw ModelError("estimate_ruin: max_steps must be at least 1");
  if (options.roulette && !(*options.roulette > 0.0 && *options.roulette <= 1.0))
    throw ModelError("estimate_ruin: roulette survival probability must lie in (0, 1]");
  const bool weighted = options.roulette.has_value() || options.expected_value_scoring;

  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    RuinEstimate part;
    for (std::uint64_t i = begin; i < end; ++i) {
      RngStream rng(seed, options.stream_offset + i);
      const Score s = run_path(model, x, caps, rng, options);
      ++part.n_paths;
      switch (s.end) {
        case End::Ruined: ++part.ruined; break;
        case End::Cap: ++part.censored_cap; break;
        case End::Horizon: ++part.censored_horizon; break;
        case End::Killed: ++part.killed; break;
      }
      part.sum += s.value;
      part.sum_sq += s.value * s.value;
      part.sum_pessimistic += s.value + s.horizon_mass;
    }
    return part;
  };
  auto fold = [](RuinEstimate a, RuinEstimate b) {
    accumulate(a, b);
    return a;
  };
  RuinEstimate e = parallel_reduce<RuinEstimate>(n_paths, kPathChunk, options.threads, body, fold);
  e.x = x;
  e.weighted = weighted;
  finalize(e, options.clopper_pearson);
  return e;
}

RuinEstimate merge(const RuinEstimate& a, const RuinEstimate& b) {
  if (a.x != b.x) throw ModelError("merge: estimates refer to different levels");
  if (a.weighted != b.weighted) throw ModelError("merge: cannot pool weighted and plain estimates");
  RuinEstimate m;
  m.x = a.x;
  m.weighted = a.weighted;
  accumulate(m, a);
  accumulate(m, b);
  finalize(m, false);
  return m;
}

std::vector<RuinEstimate> ruin_curve(const RiskModel& model, const std::vector<double>& xs, std::uint64_t n_paths,
                                     const std::optional<PathCaps>& caps, std::uint64_t seed,
                                     const EstimatorOptions& options) {
  std::vector<RuinEstimate> out;
  out.reserve(xs.size());
  for (std::size_t g = 0; g < xs.size(); ++g) {
    EstimatorOptions o = options;
    o.stream_offset = options.stream_offset + g * n_paths;
    out.push_back(estimate_ruin(model, xs[g], n_paths, caps.value_or(default_caps(xs[g])), seed, o));
  }
  return out;
}

DecayFit decay_exponent_fit(const std::vector<RuinEstimate>& curve) {
  std::vector<const RuinEstimate*> pts;
  for (const auto& e : curve)
    if (e.p_hat > 0.0) pts.push_back(&e);
  if (pts.empty()) throw NumericalError("no ruin observed");
  if (pts.size() < 4) throw NumericalError("decay_exponent_fit: need at least 4 grid points with p_hat > 0");
  const bool use_weights =
      std::all_of(pts.begin(), pts.end(), [](const RuinEstimate* e) { return e->half_width > 0.0; });
  double sw = 0, sx = 0, sy = 0;
  for (const auto* e : pts) {
    const double w = use_weights ? std::pow(e->p_hat / e->half_width, 2) : 1.0;
    sw += w;
    sx += w * std::log1p(e->x);
    sy += w * std::log(e->p_hat);
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, rss = 0;
  for (const auto* e : pts) {
    const double w = use_weights ? std::pow(e->p_hat / e->half_width, 2) : 1.0;
    const double dx = std::log1p(e->x) - mx;
    sxx += w * dx * dx;
    sxy += w * dx * (std::log(e->p_hat) - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("decay_exponent_fit: grid has no spread");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  for (const auto* e : pts) {
    const double w = use_weights ? std::pow(e->p_hat / e->half_width, 2) : 1.0;
    const double res = std::log(e->p_hat) - intercept - slope * std::log1p(e->x);
    rss += w * res * res;
  }
  // Weights are inverse variances (up to 1.96²) when present; otherwise scale by residuals.
  const double se = use_weights ? 1.96 / std::sqrt(sxx)
                                : std::sqrt(rss / static_cast<double>(pts.size() - 2) / sxx);
  return DecayFit{-slope, se, intercept, pts.size()};
}

GammaLimitReport gamma_limit_test(const RiskModel& model, std::uint64_t n_steps, std::uint64_t n_survivors,
                                  std::uint64_t seed, unsigned threads) {
  const DerivedConstants dc = derived_constants(model);
  if (!(dc.b > 0.0)) throw ModelError("gamma_limit_test: degenerate jumps (b = 0)");
  if (!(model.theta() > dc.threshold)) throw ModelError("gamma_limit_test: model is not transient (rho <= 0)");
  if (n_steps < 1 || n_survivors < 2) throw ModelError("gamma_limit_test: need n >= 1 and at least 2 paths");

  std::vector<double> values;
  values.reserve(n_survivors);
  std::uint64_t start = 0;
  while (values.size() < n_survivors) {
    const std::uint64_t batch = std::max<std::uint64_t>(n_survivors - values.size(), 64);
    using Chunk = std::vector<double>;
    auto fold = [](Chunk a, Chunk b) {
      a.insert(a.end(), b.begin(), b.end());
      return a;
    };
    auto body_states = [&](std::uint64_t b, std::uint64_t e) {
      Chunk c;
      for (std::uint64_t i = b; i < e; ++i) {
        RngStream rng(seed, derive_stream(start + i, kGammaTag));
        double r = 1.0;
        bool ruined = false;
        for (std::uint64_t n = 0; n < n_steps; ++n) {
          r += sample_jump(model, r, rng);
          if (r < 0.0) {
            ruined = true;
            break;
          }
        }
        c.push_back(ruined ? std::numeric_limits<double>::quiet_NaN() : r);
      }
      return c;
    };
    const Chunk got = parallel_reduce<Chunk>(batch, 16, threads, body_states, fold);
    for (double r : got) {
      if (!std::isnan(r) && values.size() < n_survivors) values.push_back(r * r / static_cast<double>(n_steps));
    }
    start += batch;
  }

  GammaLimitReport rep;
  rep.n_steps = n_steps;
  rep.survivors = values.size();
  rep.simulated = start;
  const double n = static_cast<double>(values.size());
  double s = 0, ss = 0;
  for (double v : values) s += v;
  rep.mean = s / n;
  for (double v : values) ss += (v - rep.mean) * (v - rep.mean);
  rep.variance = ss / (n - 1.0);
  rep.mean_std_error = std::sqrt(rep.variance / n);
  rep.reference_mean = 2.0 * dc.mu_drift + dc.b;
  rep.reference_variance = rep.reference_mean * 2.0 * dc.b;

  std::sort(values.begin(), values.end());
  const boost::math::gamma_distribution<> ref(rep.reference_mean / (2.0 * dc.b), 2.0 * dc.b);
  for (double p : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
    const auto idx = static_cast<std::size_t>(std::clamp(p * n, 0.0, n - 1.0));
    rep.quantiles.emplace_back(p, values[idx], boost::math::quantile(ref, p));
  }
  return rep;
}

}  // namespace ruin
