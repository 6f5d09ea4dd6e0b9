#include "ruin/risk_model.hpp"

#include <cmath>
#include <sstream>

#include "ruin/error.hpp"

namespace ruin {

double critical_rate(const ClaimModel& claims) {
  const double e_tau = claims.tau.mean();
  if (!(e_tau > 0.0)) throw ModelError("E tau must be positive");
  if (!std::isfinite(e_tau)) throw ModelError("E tau must be finite");
  const double e_xi = claims.xi.mean();
  if (!std::isfinite(e_xi)) throw ModelError("heavy mean claim");
  return e_xi / e_tau;
}

RiskModel::RiskModel(PremiumRate rate, ClaimModel claims)
    : rate_(std::move(rate)), claims_(std::move(claims)), flow_(rate_), v_c_(critical_rate(claims_)) {
  if (auto lim = rate_.critical_limit()) {
    if (std::abs(*lim - v_c_) > 1e-12 * std::max(1.0, v_c_)) {
      std::ostringstream os;
      os << "rate limit v_c=" << *lim << " differs from E xi / E tau = " << v_c_;
      throw ModelError(os.str());
    }
  }
  if (claims_.xi.bounded())
    warnings_.emplace_back("bounded claim sizes: positivity of the ruin probability is not checked");
}

DerivedConstants derived_constants(const RiskModel& model) {
  std::string missing;
  if (!model.xi().has_moment(2)) missing += " xi";
  if (!model.tau().has_moment(2)) missing += " tau";
  if (!missing.empty()) throw ModelError("infinite second moment:" + missing);

  DerivedConstants d;
  const double e_tau = model.tau().mean();
  d.v_c = model.v_c();
  d.b = model.xi().variance() + d.v_c * d.v_c * model.tau().variance();
  d.threshold = d.b / (2.0 * e_tau);
  d.mu_drift = model.theta() * e_tau;
  if (std::holds_alternative<CriticalInverse>(model.rate().kind()) && d.b > 0.0)
    d.rho = 2.0 * model.theta() * e_tau / d.b - 1.0;
  return d;
}

}  // namespace ruin
