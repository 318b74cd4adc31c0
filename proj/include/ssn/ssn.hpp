#pragma once

// Sub-sampled Newton with non-uniform block sampling: each iteration builds
// a sampling plan over the blocks of A(w_t), keeps a random subset, solves
// (sum_{kept} A_i^T A_i / q_i + Q) v = -g inexactly and steps w += v.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssn/glm.hpp"
#include "ssn/sampling.hpp"
#include "ssn/trace.hpp"

namespace ssn {

/// H_tilde = sum_{i in kept} A_i^T A_i / q_i + Q. Holds a reference to A.
class SubsampledHessian {
 public:
  SubsampledHessian(const BlockedMatrix& a, BlockSample sample, PsdMatrix q);

  Index dim() const noexcept { return a_.cols(); }
  const BlockSample& sample() const noexcept { return sample_; }
  const PsdMatrix& regularizer() const noexcept { return q_; }
  /// Number of rows of A entering the product.
  std::size_t kept_rows() const noexcept { return rows_.size(); }

  /// Dense d x d matrix, cost O(kept_rows d^2).
  Matrix materialize() const;
  /// out = H_tilde v, cost O(kept_rows d).
  void apply(const Vector& v, Vector& out) const;
  LinearOperator as_operator() const;

 private:
  const BlockedMatrix& a_;
  BlockSample sample_;
  PsdMatrix q_;
  std::vector<std::size_t> rows_;
  std::vector<double> weights_;
};

enum class SolverKind { automatic, direct, cg, gd };
std::string_view to_string(SolverKind s) noexcept;
SolverKind parse_solver_kind(std::string_view name);

struct SolveStats {
  SolverKind used = SolverKind::direct;
  int iters = 0;
  /// ||H v + g|| / ||g|| at exit.
  double residual = 0.0;
};

struct SubproblemSolution {
  Vector v;
  SolveStats stats;
};

/// Approximately solves H v = -g.
///   direct  Cholesky of the materialized matrix
///   cg      conjugate gradient on the operator, relative residual <= tol
///   gd      max_iters fixed steps of size 1 / lambda_max(H) from v = 0
///   automatic  cg when kept_rows > d, direct otherwise
/// max_iters <= 0 selects 10 d for cg and 1000 for gd.
SubproblemSolution solve_subproblem(const SubsampledHessian& h, const Vector& g, SolverKind solver, double tol,
                                    int max_iters);

enum class LeverageMode { exact, fast };
std::string_view to_string(LeverageMode m) noexcept;
LeverageMode parse_leverage_mode(std::string_view name);

struct SsnConfig {
  Scheme scheme = Scheme::block_partial_leverage;
  /// Sample budget s; when empty it is sized per iteration from the scheme's
  /// theoretical bound at (auto_eps, auto_delta).
  std::optional<double> budget_s;
  double auto_eps = 0.5;
  double auto_delta = 0.1;
  int leverage_recompute_period = 10;
  LeverageMode leverage_mode = LeverageMode::exact;
  FastLeverageOptions fast_leverage;
  SolverKind solver = SolverKind::automatic;
  double solver_tol = 1e-6;
  int max_solver_iters = 0;
  int max_outer_iters = 100;
  std::uint64_t seed = 0;
  /// Used only when RunOptions carries a reference solution.
  std::optional<double> stop_rel_error;
  /// Defaults to 1e-10 (1 + |F(w0)|).
  std::optional<double> stop_grad_norm;

  /// Throws ConfigError on invalid fields.
  void validate() const;
  /// Label used for traces, e.g. "ssn-plev".
  std::string method_name() const;
};

/// Runs from w0. Status is converged, max_iters, diverged or solver_failure;
/// the final iterate is returned in every case.
RunResult ssn_run(const GlmProblem& problem, const Vector& w0, const SsnConfig& cfg, const RunOptions& opts = {});

}  // namespace ssn
