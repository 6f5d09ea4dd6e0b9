#include "ruin/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ruin/error.hpp"
#include "ruin/parallel.hpp"

namespace ruin {
namespace {

constexpr std::uint64_t kPilotTag = 0x70696c6f74ULL;
constexpr std::uint64_t kMainTag = 0x6d61696eULL;
constexpr std::uint64_t kChunk = 8;

/// Runs from `start` until the chain goes strictly below `level`; returns the
/// entrance state, or nothing when the path is censored first.
std::optional<double> run_to_level(const RiskModel& model, double start, double level, const PathCaps& caps,
                                   RngStream& rng) {
  if (start < level) return start;
  double r = start;
  for (std::uint64_t n = 0; n < caps.max_steps; ++n) {
    r += sample_jump(model, r, rng);
    if (r < level) return r;
    if (r > caps.level_cap) return std::nullopt;
  }
  return std::nullopt;
}

/// Records of the running minimum until ruin or censoring.
std::vector<double> run_minimum_records(const RiskModel& model, double start, const PathCaps& caps,
                                        RngStream& rng) {
  std::vector<double> rec{start};
  if (start < 0.0) return rec;
  double r = start;
  for (std::uint64_t n = 0; n < caps.max_steps; ++n) {
    r += sample_jump(model, r, rng);
    if (r < rec.back()) {
      rec.push_back(r);
      if (r < 0.0) break;
    }
    if (r > caps.level_cap) break;
  }
  return rec;
}

using States = std::vector<double>;

States concat(States a, States b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Systematic resampling of `pool` to n starting points.
States resample(const States& pool, std::uint64_t n, RngStream& rng) {
  States out(n);
  const double u = rng.uniform();
  const double m = static_cast<double>(pool.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>((static_cast<double>(i) + u) * m / static_cast<double>(n));
    out[i] = pool[std::min(k, pool.size() - 1)];
  }
  return out;
}

std::vector<double> pilot_levels(const RiskModel& model, double x, const PathCaps& caps, std::uint64_t seed,
                                 const SplittingOptions& opt) {
  std::vector<double> levels;
  States starts(opt.pilot_particles, x);
  for (std::size_t stage = 0; stage < opt.max_levels; ++stage) {
    using Records = std::vector<std::vector<double>>;
    auto body = [&](std::uint64_t b, std::uint64_t e) {
      Records out;
      for (std::uint64_t i = b; i < e; ++i) {
        RngStream rng(seed, derive_stream(derive_stream(stage, kPilotTag), i));
        out.push_back(run_minimum_records(model, starts[i], caps, rng));
      }
      return out;
    };
    auto fold = [](Records a, Records b) {
      a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
      return a;
    };
    const Records recs = parallel_reduce<Records>(starts.size(), kChunk, opt.threads, body, fold);
    std::vector<double> minima;
    for (const auto& r : recs) minima.push_back(r.back());
    std::sort(minima.begin(), minima.end());
    const auto qi = static_cast<std::size_t>(opt.pilot_quantile * static_cast<double>(minima.size()));
    double level = minima[std::min(qi, minima.size() - 1)];
    if (level <= 0.0 || stage + 1 == opt.max_levels) {
      levels.push_back(0.0);
      return levels;
    }
    const double previous = levels.empty() ? x : levels.back();
    if (level >= previous) throw NumericalError("splitting: pilot run made no downward progress");
    levels.push_back(level);
    States next;
    for (const auto& r : recs) {
      auto it = std::find_if(r.begin(), r.end(), [level](double v) { return v < level; });
      if (it != r.end()) next.push_back(*it);
    }
    if (next.empty()) throw NumericalError("splitting: pilot run lost all particles");
    RngStream rs(seed, derive_stream(stage, kPilotTag ^ 1));
    starts = resample(next, opt.pilot_particles, rs);
  }
  levels.push_back(0.0);
  return levels;
}

}  // namespace

SplittingEstimate estimate_ruin_splitting(const RiskModel& model, double x, const PathCaps& caps,
                                          std::uint64_t seed, const SplittingOptions& opt) {
  if (!(x > 0.0)) throw ModelError("splitting: x must be positive");
  if (opt.particles < 2 || opt.pilot_particles < 10 || opt.replicates < 2)
    throw ModelError("splitting: need at least 2 particles, 10 pilot particles and 2 replicates");
  if (!(opt.pilot_quantile > 0.0 && opt.pilot_quantile < 1.0))
    throw ModelError("splitting: pilot quantile must lie in (0, 1)");

  SplittingEstimate out;
  out.x = x;
  out.levels = pilot_levels(model, x, caps, seed, opt);
  out.stage_probabilities.assign(out.levels.size(), 0.0);

  for (std::uint64_t rep = 0; rep < opt.replicates; ++rep) {
    States starts(opt.particles, x);
    double estimate = 1.0;
    for (std::size_t k = 0; k < out.levels.size(); ++k) {
      const double level = out.levels[k];
      const std::uint64_t stage_key = derive_stream(derive_stream(rep, kMainTag), k);
      auto body = [&](std::uint64_t b, std::uint64_t e) {
        States hit;
        for (std::uint64_t i = b; i < e; ++i) {
          RngStream rng(seed, derive_stream(stage_key, i));
          if (auto s = run_to_level(model, starts[i], level, caps, rng)) hit.push_back(*s);
        }
        return hit;
      };
      const States hits = parallel_reduce<States>(starts.size(), kChunk, opt.threads, body, concat);
      const double p = static_cast<double>(hits.size()) / static_cast<double>(starts.size());
      out.stage_probabilities[k] += p / static_cast<double>(opt.replicates);
      estimate *= p;
      if (hits.empty()) break;
      if (k + 1 < out.levels.size()) {
        RngStream rs(seed, derive_stream(stage_key, kMainTag));
        starts = resample(hits, opt.particles, rs);
      }
    }
    out.replicate_estimates.push_back(estimate);
  }
  const double r = static_cast<double>(opt.replicates);
  double s = 0.0;
  for (double e : out.replicate_estimates) s += e;
  out.p_hat = s / r;
  double ss = 0.0;
  for (double e : out.replicate_estimates) ss += (e - out.p_hat) * (e - out.p_hat);
  out.half_width = 1.96 * std::sqrt(ss / (r - 1.0) / r);
  return out;
}

}  // namespace ruin
