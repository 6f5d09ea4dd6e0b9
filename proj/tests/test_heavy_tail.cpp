#include <cmath>

#include "doctest.h"
#include "ruin/error.hpp"
#include "ruin/heavy_tail.hpp"
#include "test_util.hpp"

using namespace ruin;

namespace {

RiskModel heavy_model() {
  return RiskModel(PremiumRate(CriticalInverse{0.5, 2.0, 1.0}),
                   {Distribution(ParetoType{1.0}), Distribution(Exponential{1.0})});
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("Karamata integral") {
  // Pareto β = 1, scale 1: ∫_x^∞ y(1+y)^−3 dy = 1/(1+x) − 1/(2(1+x)²).
  const Distribution p(ParetoType{1.0});
  for (double x : {0.0, 3.0, 1000.0}) {
    const double ref = 1.0 / (1.0 + x) - 0.5 / ((1.0 + x) * (1.0 + x));
    CHECK(karamata_integral(p, x) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(karamata_integral(p, x, KaramataMethod::Quadrature) == doctest::Approx(ref).epsilon(1e-9));
  }
  const double x = 1000.0;
  CHECK(karamata_integral(p, x, KaramataMethod::Quadrature) / (x * x * p.tail(x)) ==
        doctest::Approx(1.0015).epsilon(1e-6));

  const Distribution e(Exponential{2.0});
  const double se = ruin::testing::simpson([&](double y) { return y * e.tail(y); }, 1.5, 40.0, 100000);
  CHECK(karamata_integral(e, 1.5) == doctest::Approx(se).epsilon(1e-10));
  CHECK(karamata_integral(e, 1.5, KaramataMethod::Quadrature) == doctest::Approx(se).epsilon(1e-10));

  const Distribution g(GammaDist{2.0, 1.0});
  const double sg = ruin::testing::simpson([&](double y) { return y * g.tail(y); }, 0.7, 80.0, 200000);
  CHECK(karamata_integral(g, 0.7) == doctest::Approx(sg).epsilon(1e-9));

  CHECK(karamata_integral(Distribution(Deterministic{3.0}), 1.0) == doctest::Approx(4.0));
  CHECK(karamata_integral(Distribution(Deterministic{3.0}), 4.0) == 0.0);
  CHECK_THROWS_AS(karamata_integral(g, 1.0, KaramataMethod::Quadrature), ModelError);
  CHECK_THROWS_AS(karamata_integral(p, -1.0), ModelError);
}

TEST_CASE("heavy regime and envelopes") {
  const auto m = heavy_model();
  const auto [beta, rho] = heavy_regime(m);
  CHECK(beta == 1.0);
  CHECK(rho == doctest::Approx(3.0));
  // Lomax index 6, scale 2.5: mean ½, b = 0.625, ρ = 2.2 < β = 4.
  RiskModel light(PremiumRate(CriticalInverse{0.5, 1.0, 1.0}),
                  {Distribution(ParetoType{4.0, 2.5}), Distribution(Exponential{1.0})});
  CHECK_THROWS_WITH_AS(heavy_regime(light), "light-tail regime: use lyapunov_bounds", ModelError);
  RiskModel expo(PremiumRate(CriticalInverse{1.0, 3.0, 1.0}),
                 {Distribution(Exponential{1.0}), Distribution(Exponential{1.0})});
  CHECK_THROWS_AS(heavy_regime(expo), ModelError);

  // shape(x) = x²(1+x)^−3; anchors chosen so the ratios are 0.5 and 0.8.
  const auto shape = [](double x) { return x * x * std::pow(1.0 + x, -3.0); };
  const auto cal = calibrate_heavy(m, {{10.0, 0.6 * shape(10.0), 0.1 * shape(10.0)},
                                       {20.0, 0.7 * shape(20.0), 0.1 * shape(20.0)}});
  CHECK(cal.c_low == doctest::Approx(0.5));
  CHECK(cal.c_high == doctest::Approx(0.8));
  const auto env = heavy_envelope(m, 40.0, cal);
  CHECK(env.shape == doctest::Approx(shape(40.0)));
  CHECK(env.lower == doctest::Approx(0.5 * shape(40.0)));
  CHECK(env.upper == doctest::Approx(0.8 * shape(40.0)));
  CHECK_THROWS_AS(calibrate_heavy(m, {}), ModelError);
}

TEST_CASE("left tail by conditional Monte Carlo against direct counting") {
  const auto m = heavy_model();
  const double x = 10.0;
  const auto rows = left_tail_check(m, x, {5.0, 20.0}, 200000, 3, 1);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    RngStream rng(99, static_cast<std::uint64_t>(row.y));
    const int n = 400000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += sample_jump(m, x, rng) < -row.y;
    const double direct = static_cast<double>(hits) / n;
    const double se = std::sqrt(direct * (1 - direct) / n);
    const double t = m.xi().tail(row.y);
    CAPTURE(row.y);
    CHECK(std::abs(row.ratio * t - direct) < 4.0 * std::hypot(se, row.std_error * t));
    CHECK(row.ratio < 1.0);
  }
}

TEST_CASE("truncated jump: two constructions agree") {
  const auto m = heavy_model();
  const std::size_t n = 20000;
  for (double x : {2.0, 30.0}) {
    RngStream a(1, 1), b(2, 2);
    std::vector<double> ja(n), jb(n);
    for (auto& j : ja) {
      j = truncated_jump(m, x, a);
      REQUIRE(j >= -0.5 * x);
    }
    for (auto& j : jb) j = truncated_jump_rejection(m, x, b);
    CAPTURE(x);
    CHECK(two_sample_ks(ja, jb) < 1.95 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("truncated chain diagnostics") {
  const auto m = heavy_model();
  EstimatorOptions o;
  o.threads = 1;
  const auto st = truncated_diagnostics(m, 5.0, 300, PathCaps{1'000'000, 200.0}, 4, o, 8, 2000);
  CHECK(st.psi_tilde_hat == 0.0);
  CHECK(st.g_table.size() == 8);
  CHECK(st.renewal_mass.size() == 8);
  for (std::size_t i = 1; i < st.renewal_mass.size(); ++i)
    CHECK(st.renewal_mass[i].second >= st.renewal_mass[i - 1].second);
  CHECK(st.down_crossing_hat >= 0.0);
  CHECK(st.down_crossing_hat <= 1.0);
  CHECK(st.big_jump_term > 0.0);
  CHECK(st.min_acceptance > 0.5);
  CHECK(st.slack == doctest::Approx(st.big_jump_term - st.psi.p_hat));
  CHECK_THROWS_AS(truncated_diagnostics(m, 0.5, 10, PathCaps{}, 1), ModelError);
}

TEST_CASE("lower bound probe") {
  const auto m = heavy_model();
  const auto pr = lower_bound_probe(m, 10.0, 0.05, 2000, 1, 1, 20000);
  CHECK(pr.horizon == 5);
  CHECK(pr.confinement > 0.5);
  CHECK(pr.c_hat > 0.0);
  CHECK(pr.lower == doctest::Approx(pr.c_hat * 5.0 * pr.confinement));
  CHECK(pr.normalized == doctest::Approx(pr.lower / (100.0 * std::pow(11.0, -3.0))));
  // P{ξ(y) < −2x} increases with y, so the minimum sits at y = x/2.
  const auto rows = left_tail_check(m, 5.0, {20.0}, 20000, 1, 1);
  CHECK(pr.c_hat <= rows[0].ratio * m.xi().tail(20.0) * 1.2);
  CHECK_THROWS_AS(lower_bound_probe(m, 10.0, 0.0, 10, 1), ModelError);
}
