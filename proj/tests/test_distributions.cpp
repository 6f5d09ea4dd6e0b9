#include <cmath>
#include <limits>

#include "doctest.h"
#include "ruin/distributions.hpp"
#include "ruin/error.hpp"
#include "test_util.hpp"

using namespace ruin;
using ruin::testing::ks_critical;
using ruin::testing::ks_distance;

TEST_CASE("exact moments") {
  Distribution e(Exponential{2.0});
  CHECK(e.moment(1) == doctest::Approx(0.5));
  CHECK(e.moment(3) == doctest::Approx(6.0 / 8.0));
  CHECK(e.variance() == doctest::Approx(0.25));

  Distribution g(GammaDist{2.5, 3.0});
  for (int k = 1; k <= 4; ++k)
    CHECK(g.moment(k) == doctest::Approx(std::tgamma(2.5 + k) / std::tgamma(2.5) / std::pow(3.0, k)));

  // Lomax with index 3 and scale 2: E X^k = s^k k! Γ(3 − k)/Γ(3).
  Distribution p(ParetoType{1.0, 2.0});
  CHECK(p.moment(1) == doctest::Approx(2.0 * 1.0 / 2.0));
  CHECK(p.moment(2) == doctest::Approx(4.0 * 2.0 / 2.0));
  CHECK(std::isinf(p.moment(3)));
  CHECK(p.has_moment(2.9));
  CHECK_FALSE(p.has_moment(3.0));

  Distribution d(Deterministic{1.5});
  CHECK(d.moment(2) == doctest::Approx(2.25));
  CHECK(d.variance() == 0.0);
  CHECK(d.bounded());
  CHECK_FALSE(e.bounded());
  CHECK(e.moment(0) == 1.0);
}

TEST_CASE("tails") {
  CHECK(Distribution(Exponential{1.0}).tail(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(Distribution(ParetoType{1.0}).tail(3.0) == doctest::Approx(1.0 / 64.0));
  CHECK(Distribution(ParetoType{1.0}).tail(-1.0) == 1.0);
  CHECK(Distribution(Deterministic{1.0}).tail(0.5) == 1.0);
  CHECK(Distribution(Deterministic{1.0}).tail(1.0) == 0.0);
  // Gamma(2, 1): P{X > x} = (1 + x) e^{−x}
  CHECK(Distribution(GammaDist{2.0, 1.0}).tail(1.7) == doctest::Approx(2.7 * std::exp(-1.7)));
}

TEST_CASE("sampling matches the CDF") {
  const std::size_t n = 20000;
  for (const auto& dist : {Distribution(Exponential{1.3}), Distribution(GammaDist{0.7, 2.0}),
                           Distribution(GammaDist{3.0, 1.0}), Distribution(ParetoType{1.0, 1.0}),
                           Distribution(ParetoType{0.5, 3.0})}) {
    RngStream rng(9, 1);
    std::vector<double> xs(n);
    for (auto& x : xs) x = dist.sample(rng);
    CAPTURE(dist.describe());
    CHECK(ks_distance(xs, [&](double x) { return 1.0 - dist.tail(x); }) < ks_critical(n));
  }
}

TEST_CASE("sample_below follows the conditional law") {
  const std::size_t n = 20000;
  for (const auto& dist : {Distribution(Exponential{1.0}), Distribution(GammaDist{2.0, 1.0}),
                           Distribution(ParetoType{1.0, 1.0})}) {
    const double upper = 1.2;
    const double mass = 1.0 - dist.tail(upper);
    RngStream rng(3, 2);
    std::vector<double> xs(n);
    for (auto& x : xs) {
      x = dist.sample_below(upper, rng);
      REQUIRE(x <= upper);
    }
    CAPTURE(dist.describe());
    CHECK(ks_distance(xs, [&](double x) { return (1.0 - dist.tail(x)) / mass; }) < ks_critical(n));
  }
  RngStream rng(1, 1);
  CHECK_THROWS_AS(Distribution(Exponential{1.0}).sample_below(-1.0, rng), ModelError);
  CHECK_THROWS_AS(Distribution(Deterministic{2.0}).sample_below(1.0, rng), ModelError);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(Distribution(Exponential{0.0}), ModelError);
  CHECK_THROWS_AS(Distribution(Exponential{-1.0}), ModelError);
  CHECK_THROWS_AS(Distribution(GammaDist{0.0, 1.0}), ModelError);
  CHECK_THROWS_AS(Distribution(ParetoType{-1.0}), ModelError);
  CHECK_THROWS_AS(Distribution(ParetoType{1.0, 0.0}), ModelError);
  CHECK_THROWS_AS(Distribution(Deterministic{-0.1}), ModelError);
  CHECK_THROWS_AS(Distribution(Exponential{std::numeric_limits<double>::quiet_NaN()}), ModelError);
}
