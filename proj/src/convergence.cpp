#include "ssn/convergence.hpp"

#include <cmath>
#include <string>

#include "ssn/errors.hpp"

namespace ssn {

std::string_view to_string(ApproxRegime r) noexcept { return r == ApproxRegime::c1 ? "c1" : "c2"; }

ApproxRegime parse_regime(std::string_view name) {
  if (name == "c1") return ApproxRegime::c1;
  if (name == "c2") return ApproxRegime::c2;
  throw ConfigError("unknown regime '" + std::string(name) + "'");
}

ConvergenceConstants convergence_constants(double eps, double kappa, double lipschitz, double mu,
                                           ApproxRegime regime) {
  if (!(eps >= 0.0)) throw ConfigError("eps must be >= 0");
  if (!(kappa >= 1.0)) throw ConfigError("kappa must be >= 1");
  if (!(mu > 0.0)) throw ConfigError("mu must be > 0");
  if (!(lipschitz >= 0.0)) throw ConfigError("L must be >= 0");
  ConvergenceConstants c{0.0, 0.0, regime, eps, kappa, lipschitz, mu};
  if (regime == ApproxRegime::c1) {
    const double margin = 1.0 - 2.0 * eps * kappa;
    if (!(margin > 0.0)) {
      throw ConfigError("regime c1 requires eps * kappa < 1/2 (got " + std::to_string(eps * kappa) + ")");
    }
    c.c_q = 2.0 * lipschitz / (margin * mu);
    c.c_l = 4.0 * eps * kappa / margin;
  } else {
    if (!(eps < 1.0)) throw ConfigError("regime c2 requires eps < 1 (got " + std::to_string(eps) + ")");
    c.c_q = 2.0 * lipschitz / ((1.0 - eps) * mu);
    c.c_l = 3.0 * eps * std::sqrt(kappa) / (1.0 - eps);
  }
  return c;
}

}  // namespace ssn
