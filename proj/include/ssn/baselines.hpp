#pragma once

// Reference optimizers: exact Newton (also the w* oracle), L-BFGS, gradient
// descent and accelerated gradient descent.

#include <cstdint>
#include <optional>
#include <string>

#include "ssn/glm.hpp"
#include "ssn/trace.hpp"

namespace ssn {

enum class BaselineMethod { newton, lbfgs, gd, agd };
std::string_view to_string(BaselineMethod m) noexcept;
BaselineMethod parse_baseline_method(std::string_view name);

enum class InnerSolver { direct, cg };
std::string_view to_string(InnerSolver s) noexcept;
InnerSolver parse_inner_solver(std::string_view name);

struct StepRule {
  enum class Kind { fixed, backtracking };
  Kind kind = Kind::fixed;
  /// Fixed step; empty means 1 / lambda_max(H(w0)). Initial trial step for backtracking.
  std::optional<double> eta;
  /// Armijo sufficient-decrease parameter and shrink factor.
  double alpha = 0.3;
  double beta = 0.5;
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::newton;
  InnerSolver inner_solver = InnerSolver::direct;
  double inner_tol = 1e-12;
  int lbfgs_history = 50;
  /// L-BFGS line-search sufficient-decrease constant.
  double armijo_c = 1e-4;
  StepRule step_rule;
  /// AGD strong-convexity parameter; empty means lambda_min(H(w0)).
  std::optional<double> mu;
  int max_iters = 100;
  std::uint64_t seed = 0;
  /// Defaults to 1e-10 (1 + |F(w0)|).
  std::optional<double> stop_grad_norm;
  std::optional<double> stop_rel_error;

  void validate() const;
  std::string method_name() const;
};

/// Dispatches on cfg.method.
RunResult baseline_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg,
                       const RunOptions& opts = {});

/// w_{t+1} = w_t - H(w_t)^{-1} g(w_t) with the exact Hessian A^T A + Q.
/// Throws SingularMatrixError when H is not positive definite.
RunResult newton_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg,
                     const RunOptions& opts = {});
/// Two-loop recursion with an Armijo backtracking line search; the memory is
/// cleared whenever the direction fails to descend.
RunResult lbfgs_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg,
                    const RunOptions& opts = {});
/// w <- w - eta g. Ten consecutive objective increases end the run with bad_step.
RunResult gd_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts = {});
/// Constant-momentum Nesterov method for strongly convex objectives with
/// momentum (sqrt(L/mu) - 1) / (sqrt(L/mu) + 1) and step 1/L.
RunResult agd_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg,
                  const RunOptions& opts = {});

/// Minimizer from exact Newton started at 0, run until the gradient norm
/// reaches grad_tol or stops improving for three iterations.
Vector reference_solution(const GlmProblem& problem, double grad_tol = 1e-12, int max_iters = 100);

}  // namespace ssn
