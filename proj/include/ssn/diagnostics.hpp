#pragma once

// Measurements that certify Hessian approximation quality and the local
// error recursion: relative spectral error (C1), whitened two-sided error
// (C2), the three condition-number variants and a probed Hessian Lipschitz
// constant.

#include <cstdint>
#include <limits>
#include <vector>

#include "ssn/convergence.hpp"
#include "ssn/glm.hpp"
#include "ssn/sampling.hpp"
#include "ssn/trace.hpp"

namespace ssn {

/// ||H_tilde - H||_2 / ||H||_2
double measure_c1(const Matrix& h_exact, const Matrix& h_tilde);

/// Sum_{kept} A_i^T A_i / q_i + Q.
Matrix sampled_hessian(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample);

/// Whitens Hessian differences with R from the QR of [A; Q^{1/2}], so that
/// the smallest eps with -eps H <= H_tilde - H <= eps H equals
/// ||R^{-T} (H_tilde - H) R^{-1}||_2. Build once per (A, Q) and measure many samples.
class C2Meter {
 public:
  /// Throws Error when [A; Q^{1/2}] is rank-deficient (use lambda > 0).
  C2Meter(const BlockedMatrix& a, const PsdMatrix& q);

  const Matrix& hessian() const noexcept { return h_; }
  const Matrix& r_factor() const noexcept { return r_; }

  double measure(const BlockSample& sample) const;
  double measure_tilde(const Matrix& h_tilde) const;
  double measure_c1(const BlockSample& sample) const;

 private:
  const BlockedMatrix& a_;
  const PsdMatrix& q_;
  Matrix h_;
  Matrix r_;
};

double measure_c2(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample);

struct ConditionReport {
  double eps_c1 = 0.0;
  double eps_c2 = 0.0;
  double threshold = 0.0;
  bool holds_c1 = false;
  bool holds_c2 = false;
};

ConditionReport condition_report(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample,
                                 double threshold);

/// Condition numbers of H = sum_i H_i + Q with H_i = A_i^T A_i.
///   kappa      lambda_max(sum H_i + Q) / lambda_min(sum H_i + Q)
///   kappa_raw  lambda_max(sum H_i) / lambda_min(sum H_i)
///   kappa_hat  n max_i lambda_max(H_i) / lambda_min(sum H_i)
///   kappa_bar  max_i lambda_max(H_i) / min_i lambda_min(H_i)
/// A non-positive denominator yields +infinity.
struct ConditionNumbers {
  double kappa = 0.0;
  double kappa_raw = 0.0;
  double kappa_hat = 0.0;
  double kappa_bar = 0.0;
  double lambda_min = 0.0;  // of sum H_i + Q
  double lambda_max = 0.0;
};

ConditionNumbers condition_numbers(const std::vector<Matrix>& blocks, const PsdMatrix& q);
ConditionNumbers condition_numbers(const BlockedMatrix& a, const PsdMatrix& q);

/// Instance constants used to check the error recursion.
struct RecursionModel {
  double lipschitz = 0.0;  // already inflated if desired
  double mu = 1.0;
  double kappa = 1.0;
  ApproxRegime regime = ApproxRegime::c2;
  /// Fallbacks when a record carries no measurement.
  double eps = 0.0;
  double eps0 = 0.0;
  /// Take eps / eps0 from the trace records (eps_c2 or eps_c1 by regime).
  bool use_trace_measurements = true;
  /// Slack for floating-point noise: lhs <= bound * (1 + rel_slack) + abs_slack.
  double rel_slack = 1e-9;
  double abs_slack = 0.0;
};

struct RecursionStep {
  int iter = 0;
  double error = 0.0;
  double next_error = 0.0;
  double bound = 0.0;
  double linear_coefficient = 0.0;
  bool in_region = false;
  bool satisfied = false;
};

struct RecursionReport {
  std::vector<RecursionStep> steps;
  double region_radius = 0.0;  // mu / (4 L)
  int in_region_steps = 0;
  int in_region_satisfied = 0;
  /// Some in-region step had a linear coefficient >= 1, so the recursion
  /// itself does not force contraction there.
  bool non_contraction = false;
  /// Steps whose constants were undefined (regime precondition violated).
  int skipped_steps = 0;

  double fraction_satisfied() const {
    return in_region_steps == 0 ? 1.0 : static_cast<double>(in_region_satisfied) / in_region_steps;
  }
};

/// Evaluates ||D_{t+1}|| <= (1+eps0) C_q ||D_t||^2 + (eps0 + (1+eps0) C_l) ||D_t||
/// for consecutive records. Errors come from stored iterates when present,
/// otherwise from the abs_error column.
RecursionReport verify_recursion(const RunTrace& trace, const Vector& w_star, const RecursionModel& model);

struct LipschitzEstimate {
  double lower = 0.0;     // max probed ||H(u) - H(v)|| / ||u - v||
  double inflated = 0.0;  // 2 * lower
};

/// Probes `probes` points uniformly in the ball B(center, radius), in a
/// seed-determined order (so smaller probe counts see a prefix of the points).
LipschitzEstimate estimate_lipschitz_L(const GlmProblem& problem, const Vector& center, double radius, int probes,
                                       std::uint64_t seed);

}  // namespace ssn
