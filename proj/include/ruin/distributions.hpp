#pragma once

#include <string>
#include <variant>

#include "ruin/rng.hpp"

namespace ruin {

struct Exponential {
  double rate;
};

struct GammaDist {
  double shape;
  double rate;
};

/// Lomax-type law with survival function (1 + x/scale)^-(2 + beta); regularly
/// varying with index -(2 + beta).
struct ParetoType {
  double beta;
  double scale = 1.0;
};

struct Deterministic {
  double value;
};

/// Non-negative distribution used for claim sizes and inter-claim times.
/// Parameters are validated on construction; the object is immutable.
class Distribution {
 public:
  using Family = std::variant<Exponential, GammaDist, ParetoType, Deterministic>;

  explicit Distribution(Family family);

  const Family& family() const { return family_; }

  /// Whether E X^k is finite (k may be fractional).
  bool has_moment(double k) const;
  /// Exact E X^k; +infinity when the moment does not exist.
  double moment(int k) const;
  double mean() const { return moment(1); }
  double variance() const;

  /// P{X > x}; equals 1 for x < 0.
  double tail(double x) const;
  /// Whether the support is bounded above.
  bool bounded() const;

  double sample(RngStream& rng) const;
  /// Draw from the law of X conditioned on X <= upper. Requires tail(upper) < 1.
  double sample_below(double upper, RngStream& rng) const;

  std::string describe() const;

 private:
  Family family_;
};

}  // namespace ruin
