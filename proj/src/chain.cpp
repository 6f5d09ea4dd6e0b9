#include "ruin/chain.hpp"

#include <cmath>

#include "ruin/error.hpp"
#include "ruin/parallel.hpp"

namespace ruin {

double sample_jump(const RiskModel& model, double x, RngStream& rng) {
  const double tau = model.tau().sample(rng);
  const double xi = model.xi().sample(rng);
  return model.flow()(x, tau) - x - xi;
}

ChainPath simulate_path(const RiskModel& model, double x0, const PathCaps& caps, RngStream& rng,
                        bool store_states) {
  if (!(x0 >= 0.0)) throw ModelError("simulate_path: x0 must be non-negative");
  if (caps.max_steps < 1) throw ModelError("simulate_path: max_steps must be at least 1");
  ChainPath path{{x0}, Survived{SurvivalReason::HorizonExhausted, caps.max_steps}};
  double r = x0;
  for (std::uint64_t n = 1; n <= caps.max_steps; ++n) {
    r += sample_jump(model, r, rng);
    if (store_states) path.states.push_back(r);
    if (r < 0.0) {
      path.outcome = Ruined{n};
      return path;
    }
    if (r > caps.level_cap) {
      path.outcome = Survived{SurvivalReason::HitCap, n};
      return path;
    }
  }
  return path;
}

namespace {

struct PowerSums {
  std::vector<double> s;   // Σ d_k, k = 1..k_max
  std::vector<double> s2;  // Σ d_k²
};

constexpr std::uint64_t kMomentChunk = 1 << 16;
constexpr std::uint64_t kMomentTag = 0x6d6f6d656e7473ULL;

// E (v_c τ − ξ)^k from the exact moments of the independent parts.
double control_moment(const RiskModel& model, int k) {
  double m = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    const double term = binom * std::pow(model.v_c(), j) * model.tau().moment(j) * model.xi().moment(k - j);
    m += ((k - j) % 2 ? -term : term);
    binom = binom * (k - j) / (j + 1);
  }
  return m;
}

}  // namespace

std::vector<MomentEstimate> jump_moment_estimates(const RiskModel& model, double x, int k_max,
                                                  std::uint64_t n_draws, std::uint64_t seed,
                                                  unsigned threads, bool control_variates) {
  if (n_draws < 1000) throw ModelError("jump_moment_estimates: need at least 1000 draws");
  if (k_max < 1) throw ModelError("jump_moment_estimates: k_max must be at least 1");
  if (!(x >= 0.0)) throw ModelError("jump_moment_estimates: level must be non-negative");
  std::vector<double> cv_mean(k_max + 1, 0.0);
  std::vector<bool> use_cv(k_max + 1, false);
  for (int k = 1; k <= k_max; ++k) {
    use_cv[k] = control_variates && model.xi().has_moment(k) && model.tau().has_moment(k);
    if (use_cv[k]) cv_mean[k] = control_moment(model, k);
  }
  const double v_c = model.v_c();
  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    PowerSums acc{std::vector<double>(k_max + 1, 0.0), std::vector<double>(k_max + 1, 0.0)};
    RngStream rng(seed, derive_stream(begin / kMomentChunk, kMomentTag));
    for (std::uint64_t i = begin; i < end; ++i) {
      const double tau = model.tau().sample(rng);
      const double xi = model.xi().sample(rng);
      const double j = model.flow()(x, tau) - x - xi;
      const double y = v_c * tau - xi;
      double pj = 1.0, py = 1.0;
      for (int k = 1; k <= k_max; ++k) {
        pj *= j;
        py *= y;
        const double d = use_cv[k] ? pj - py + cv_mean[k] : pj;
        acc.s[k] += d;
        acc.s2[k] += d * d;
      }
    }
    return acc;
  };
  auto merge = [k_max](PowerSums a, PowerSums b) {
    if (a.s.empty()) return b;
    for (int k = 1; k <= k_max; ++k) {
      a.s[k] += b.s[k];
      a.s2[k] += b.s2[k];
    }
    return a;
  };
  const PowerSums total = parallel_reduce<PowerSums>(n_draws, kMomentChunk, threads, body, merge);
  const double n = static_cast<double>(n_draws);
  std::vector<MomentEstimate> out;
  for (int k = 1; k <= k_max; ++k) {
    const double m = total.s[k] / n;
    const double var = std::max(0.0, total.s2[k] / n - m * m);
    out.push_back({m, std::sqrt(var / n)});
  }
  return out;
}

}  // namespace ruin
