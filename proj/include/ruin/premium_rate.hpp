#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ruin {

struct ConstantRate {
  double v;
};

/// v(z) = v_c + theta / max(z, z_min)
struct CriticalInverse {
  double v_c;
  double theta;
  double z_min = 1.0;
};

/// v(z) = v_c + theta / max(z, z_min)^alpha, alpha in (0, 1)
struct CriticalPower {
  double v_c;
  double theta;
  double alpha;
  double z_min = 1.0;
};

/// Piecewise constant: the rate of the last breakpoint at or below z (the
/// first rate applies below the first breakpoint).
struct Tabulated {
  std::vector<std::pair<double, double>> breakpoints;
};

/// Deviation envelope p(z) = scale * max(z, 1)^-exponent; zero when scale == 0.
/// Non-increasing and integrable on [1, inf) for exponent > 1.
struct Envelope {
  double scale = 0.0;
  double exponent = 1.5;

  double operator()(double z) const;
  /// Integral of p over [0, z].
  double integral(double z) const;
  /// Integral of p over [0, inf).
  double total() const;
};

/// Level-dependent premium rate v(z). Immutable after construction.
class PremiumRate {
 public:
  using Kind = std::variant<ConstantRate, CriticalInverse, CriticalPower, Tabulated>;

  explicit PremiumRate(Kind kind, std::optional<Envelope> envelope = std::nullopt);

  const Kind& kind() const { return kind_; }
  const std::optional<Envelope>& envelope() const { return envelope_; }

  double operator()(double z) const { return evaluate(z); }
  double evaluate(double z) const;

  /// sup_z v(z)
  double sup() const { return sup_; }
  /// inf_z v(z)
  double inf() const { return inf_; }

  bool is_critical() const;
  /// Limit of v at infinity for critical families.
  std::optional<double> critical_limit() const;
  std::optional<double> theta() const;
  /// Convergence exponent: 1 for CriticalInverse, alpha for CriticalPower.
  std::optional<double> alpha() const;
  /// Floor level for critical families, 0 otherwise.
  double z_min() const;

  std::string describe() const;

 private:
  Kind kind_;
  std::optional<Envelope> envelope_;
  double sup_ = 0.0;
  double inf_ = 0.0;
};

/// Convenience evaluator matching the free-function operation surface.
inline double evaluate_rate(const PremiumRate& rate, double z) { return rate.evaluate(z); }

}  // namespace ruin
