#include "ruin/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "ruin/error.hpp"

namespace ruin {

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b >= a)) throw ModelError("integrate: need a <= b");
  if (a == b) return {};
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err);
  if (!std::isfinite(v)) throw NumericalError("integrate: non-finite result");
  return {v, err};
}

QuadResult integrate_with_tail(const std::function<double(double)>& f, double a, double tail_from,
                               const std::function<TailRemainder(double)>& tail, double rel_tol,
                               double tail_rel_tol) {
  QuadResult acc;
  double lo = a;
  for (int panel = 0; panel < 400; ++panel) {
    const double hi = std::max(2.0 * lo, lo + 1.0);
    const QuadResult piece = integrate(f, lo, hi, rel_tol);
    acc.value += piece.value;
    acc.error += piece.error;
    lo = hi;
    if (lo < tail_from) continue;
    const TailRemainder t = tail(lo);
    if (t.uncertainty <= tail_rel_tol * (acc.value + t.value)) {
      acc.value += t.value;
      acc.error += t.uncertainty;
      return acc;
    }
  }
  throw NumericalError("integrate_with_tail: remainder did not become negligible");
}

}  // namespace ruin
