#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ruin/distributions.hpp"
#include "ruin/flow.hpp"
#include "ruin/premium_rate.hpp"

namespace ruin {

/// Independent claim size xi and inter-claim time tau.
struct ClaimModel {
  Distribution xi;
  Distribution tau;
};

/// Eξ/Eτ. Throws ModelError on infinite Eξ or non-positive Eτ.
double critical_rate(const ClaimModel& claims);

struct DerivedConstants {
  double v_c = 0.0;
  double b = 0.0;            // Var ξ + v_c² Var τ
  double mu_drift = 0.0;     // θ Eτ (0 for non-critical rates)
  std::optional<double> rho; // 2θEτ/b − 1, CriticalInverse only
  double threshold = 0.0;    // b / (2 Eτ)
};

/// Premium rate plus claims. The constructor checks that a critical family's
/// limit equals Eξ/Eτ.
class RiskModel {
 public:
  RiskModel(PremiumRate rate, ClaimModel claims);

  const PremiumRate& rate() const { return rate_; }
  const ClaimModel& claims() const { return claims_; }
  const Distribution& xi() const { return claims_.xi; }
  const Distribution& tau() const { return claims_.tau; }
  const FlowSolver& flow() const { return flow_; }

  double v_c() const { return v_c_; }
  double v_bar() const { return rate_.sup(); }
  double theta() const { return rate_.theta().value_or(0.0); }

  /// Non-fatal observations made at construction (e.g. bounded claims).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  PremiumRate rate_;
  ClaimModel claims_;
  FlowSolver flow_;
  double v_c_;
  std::vector<std::string> warnings_;
};

/// Throws ModelError naming every infinite second moment.
DerivedConstants derived_constants(const RiskModel& model);

}  // namespace ruin
