#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ruin/error.hpp"
#include "ruin/quadrature.hpp"

using namespace ruin;

TEST_CASE("finite interval") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.error < 1e-9);
  CHECK(integrate([](double x) { return x; }, 1.0, 1.0).value == 0.0);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), ModelError);
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / (x - x); }, 0.0, 1.0), NumericalError);
}

TEST_CASE("improper integral with exact remainder") {
  // ∫_1^∞ x^{−3} = ½ with remainder Y^{−2}/2.
  auto r = integrate_with_tail([](double x) { return std::pow(x, -3.0); }, 1.0, 4.0,
                               [](double y) { return TailRemainder{0.5 / (y * y), 0.0}; });
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("improper integral with a one-sided bound") {
  // ∫_0^∞ e^{−x²} = √π/2; remainder bounded by e^{−Y²}/(2Y).
  auto r = integrate_with_tail([](double x) { return std::exp(-x * x); }, 0.0, 1.0, [](double y) {
    const double b = std::exp(-y * y) / (2.0 * y);
    return TailRemainder{b, b};
  });
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-11));
}
