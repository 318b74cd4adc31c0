#pragma once

#include <string_view>

namespace ssn {

/// Which Hessian approximation guarantee the constants are derived from:
/// c1 is the relative spectral-norm bound, c2 the two-sided PSD-order bound.
enum class ApproxRegime { c1, c2 };

std::string_view to_string(ApproxRegime r) noexcept;
ApproxRegime parse_regime(std::string_view name);

/// Constants of the local linear-quadratic error recursion
///   ||w_{t+1} - w*|| <= C_q ||w_t - w*||^2 + C_l ||w_t - w*||.
struct ConvergenceConstants {
  double c_q = 0.0;
  double c_l = 0.0;
  ApproxRegime regime = ApproxRegime::c2;
  double eps = 0.0;
  double kappa = 1.0;
  double lipschitz = 0.0;
  double mu = 1.0;

  /// Quadratic coefficient when the subproblem is solved to relative error eps0.
  double inexact_c_q(double eps0) const noexcept { return (1.0 + eps0) * c_q; }
  /// Linear coefficient when the subproblem is solved to relative error eps0.
  double inexact_c_l(double eps0) const noexcept { return eps0 + (1.0 + eps0) * c_l; }
};

/// c1: C_q = 2L / ((1 - 2 eps kappa) mu), C_l = 4 eps kappa / (1 - 2 eps kappa); needs eps kappa < 1/2.
/// c2: C_q = 2L / ((1 - eps) mu),          C_l = 3 eps sqrt(kappa) / (1 - eps); needs eps < 1.
/// Throws ConfigError naming the violated inequality.
ConvergenceConstants convergence_constants(double eps, double kappa, double lipschitz, double mu,
                                           ApproxRegime regime);

}  // namespace ssn
