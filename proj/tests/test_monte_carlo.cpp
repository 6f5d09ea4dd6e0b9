#include <cmath>

#include "doctest.h"
#include "ruin/error.hpp"
#include "ruin/monte_carlo.hpp"

using namespace ruin;

namespace {

ClaimModel expexp() { return {Distribution(Exponential{1.0}), Distribution(Exponential{1.0})}; }

// Classical Cramér–Lundberg with λ = μ = 1 and rate c: ψ(x) = e^{−(1 − 1/c)x}/c.
double cramer_lundberg(double c, double x) { return std::exp(-(1.0 - 1.0 / c) * x) / c; }

RiskModel constant_model() { return RiskModel(PremiumRate(ConstantRate{2.0}), expexp()); }

}  // namespace

TEST_CASE("plain estimator against the classical formula") {
  const auto m = constant_model();
  EstimatorOptions o;
  o.threads = 1;
  const auto e = estimate_ruin(m, 2.0, 40000, PathCaps{1'000'000, 200.0}, 17, o);
  const double ref = cramer_lundberg(2.0, 2.0);
  CHECK(std::abs(e.p_hat - ref) < 2.5 * e.half_width);
  CHECK(e.half_width == doctest::Approx(1.96 * std::sqrt(e.p_hat * (1 - e.p_hat) / 40000.0)));
  CHECK(e.ruined + e.censored_cap + e.censored_horizon == e.n_paths);
  CHECK_FALSE(e.weighted);
  CHECK(e.ci_low < e.p_hat);
  CHECK(e.ci_high > e.p_hat);
}

TEST_CASE("roulette and expected-value scoring stay unbiased") {
  const auto m = constant_model();
  const double ref = cramer_lundberg(2.0, 3.0);
  EstimatorOptions r;
  r.threads = 1;
  r.roulette = 0.5;
  const auto a = estimate_ruin(m, 3.0, 40000, PathCaps{1'000'000, 200.0}, 5, r);
  CHECK(a.weighted);
  CHECK(a.killed > 0);
  CHECK(std::abs(a.p_hat - ref) < 2.5 * a.half_width);

  EstimatorOptions ev;
  ev.threads = 1;
  ev.expected_value_scoring = true;
  const auto b = estimate_ruin(m, 3.0, 20000, PathCaps{1'000'000, 200.0}, 6, ev);
  CHECK(b.ruined == 0);
  CHECK(std::abs(b.p_hat - ref) < 2.5 * b.half_width);
  CHECK(b.half_width < a.half_width);
}

TEST_CASE("results do not depend on the thread count") {
  RiskModel m(PremiumRate(CriticalInverse{1.0, 3.0, 1.0}), expexp());
  EstimatorOptions o;
  o.roulette = 0.25;
  o.threads = 1;
  const auto a = estimate_ruin(m, 5.0, 3000, default_caps(5.0), 9, o);
  o.threads = 4;
  const auto b = estimate_ruin(m, 5.0, 3000, default_caps(5.0), 9, o);
  CHECK(a.sum == b.sum);
  CHECK(a.sum_sq == b.sum_sq);
  CHECK(a.killed == b.killed);
  CHECK(a.p_hat == b.p_hat);
}

TEST_CASE("merge pools disjoint stream ranges") {
  const auto m = constant_model();
  EstimatorOptions o;
  o.threads = 1;
  const PathCaps caps{1'000'000, 100.0};
  const auto whole = estimate_ruin(m, 1.0, 2000, caps, 3, o);
  const auto first = estimate_ruin(m, 1.0, 1000, caps, 3, o);
  o.stream_offset = 1000;
  const auto second = estimate_ruin(m, 1.0, 1000, caps, 3, o);
  const auto pooled = merge(first, second);
  CHECK(pooled.ruined == whole.ruined);
  CHECK(pooled.n_paths == 2000);
  CHECK(pooled.p_hat == doctest::Approx(whole.p_hat));
  CHECK_THROWS_AS(merge(first, estimate_ruin(m, 2.0, 10, caps, 3, o)), ModelError);
  EstimatorOptions w;
  w.roulette = 0.5;
  CHECK_THROWS_AS(merge(first, estimate_ruin(m, 1.0, 10, caps, 3, w)), ModelError);
}

TEST_CASE("Clopper-Pearson with no events") {
  // ξ ≡ 0: the reserve never decreases.
  RiskModel m(PremiumRate(ConstantRate{1.0}), {Distribution(Deterministic{0.0}), Distribution(Exponential{1.0})});
  EstimatorOptions o;
  o.clopper_pearson = true;
  o.threads = 1;
  const auto e = estimate_ruin(m, 1.0, 500, PathCaps{1'000'000, 10.0}, 1, o);
  CHECK(e.ruined == 0);
  CHECK(e.ci_low == 0.0);
  CHECK(e.ci_high == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 500.0)).epsilon(1e-10));
}

TEST_CASE("horizon censoring and pessimistic estimate") {
  RiskModel m(PremiumRate(CriticalInverse{1.0, 3.0, 1.0}), expexp());
  EstimatorOptions o;
  o.threads = 1;
  const auto e = estimate_ruin(m, 5.0, 500, PathCaps{3, 1e9}, 1, o);
  CHECK(e.censored_horizon > 0);
  CHECK(e.p_hat_pessimistic == doctest::Approx(static_cast<double>(e.ruined + e.censored_horizon) / 500.0));
  CHECK_THROWS_AS(estimate_ruin(m, 5.0, 0, PathCaps{}, 1), ModelError);
  EstimatorOptions bad;
  bad.roulette = 1.5;
  CHECK_THROWS_AS(estimate_ruin(m, 5.0, 10, PathCaps{}, 1, bad), ModelError);
}

TEST_CASE("curve streams and default caps") {
  CHECK(default_caps(5.0).level_cap == 1e4);
  CHECK(default_caps(500.0).level_cap == 5e4);
  CHECK(default_caps(5.0).max_steps == 1'000'000);
  const auto m = constant_model();
  EstimatorOptions o;
  o.threads = 1;
  const auto curve = ruin_curve(m, {1.0, 2.0}, 300, PathCaps{1'000'000, 100.0}, 4, o);
  o.stream_offset = 300;
  const auto direct = estimate_ruin(m, 2.0, 300, PathCaps{1'000'000, 100.0}, 4, o);
  CHECK(curve[1].ruined == direct.ruined);
}

TEST_CASE("decay exponent fit on an exact power law") {
  std::vector<RuinEstimate> curve;
  for (double x : {10.0, 20.0, 40.0, 80.0}) {
    RuinEstimate e;
    e.x = x;
    e.p_hat = 3.0 * std::pow(1.0 + x, -2.0);
    e.half_width = 0.1 * e.p_hat;
    curve.push_back(e);
  }
  const auto fit = decay_exponent_fit(curve);
  CHECK(fit.rho_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.points == 4);
  curve.pop_back();
  CHECK_THROWS_AS(decay_exponent_fit(curve), NumericalError);
  for (auto& e : curve) e.p_hat = 0.0;
  CHECK_THROWS_WITH_AS(decay_exponent_fit(curve), "no ruin observed", NumericalError);
}

TEST_CASE("gamma limit report") {
  RiskModel m(PremiumRate(CriticalInverse{1.0, 3.0, 1.0}), expexp());
  const auto a = gamma_limit_test(m, 200, 300, 2, 1);
  const auto b = gamma_limit_test(m, 200, 300, 2, 4);
  CHECK(a.reference_mean == 8.0);
  CHECK(a.reference_variance == 32.0);
  CHECK(a.survivors == 300);
  CHECK(a.simulated >= 300);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK(a.quantiles.size() == 7);
  // Γ(shape 2, scale 4) median: 4 × 1.678347.
  CHECK(std::get<2>(a.quantiles[3]) == doctest::Approx(6.713388).epsilon(1e-5));
  RiskModel rec(PremiumRate(CriticalInverse{1.0, 0.5, 1.0}), expexp());
  CHECK_THROWS_AS(gamma_limit_test(rec, 10, 10, 1), ModelError);
}
