#pragma once

#include <functional>

namespace ruin {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss–Kronrod (15/31 pair) on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-11);

/// Analytic remainder ∫_Y^∞ f: `value` is added to the result and
/// `uncertainty` to the error (0 for an exact remainder, the value itself for
/// a one-sided bound).
struct TailRemainder {
  double value = 0.0;
  double uncertainty = 0.0;
};

/// ∫_a^∞ f over geometrically growing panels. After every panel ending at or
/// beyond `tail_from`, the remainder is requested; integration stops once its
/// uncertainty is below `tail_rel_tol` times the accumulated integral.
QuadResult integrate_with_tail(const std::function<double(double)>& f, double a, double tail_from,
                               const std::function<TailRemainder(double)>& tail, double rel_tol = 1e-11,
                               double tail_rel_tol = 1e-12);

}  // namespace ruin
