#pragma once

// Ridge-regularized generalized linear models
//   F(w) = sum_i psi(x_i^T w, y_i) + lambda ||w||^2
// and the factorization of their Hessian as A(w)^T A(w) + Q with
// A(w) = D(w) X, D_ii = sqrt(psi''(x_i^T w, y_i)) and Q = 2 lambda I.

#include <string_view>

#include "ssn/linalg.hpp"

namespace ssn {

enum class LossKind { logistic, squared };

std::string_view to_string(LossKind kind) noexcept;
LossKind parse_loss_kind(std::string_view name);

struct PsiValues {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// psi and its first two derivatives in u.
///   logistic: psi(u, y) = log(1 + exp(-u y)), evaluated without overflow
///   squared:  psi(u, y) = (u - y)^2 / 2
PsiValues psi_derivatives(double u, double y, LossKind kind) noexcept;

/// Vertical stack of n blocks A_i, each block_rows x cols. Block i occupies
/// rows [i * block_rows, (i + 1) * block_rows).
class BlockedMatrix {
 public:
  BlockedMatrix(Matrix entries, Index block_rows);

  Index block_count() const noexcept { return entries_.rows() / block_rows_; }
  Index block_rows() const noexcept { return block_rows_; }
  Index cols() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }

  auto block(Index i) const { return entries_.middleRows(i * block_rows_, block_rows_); }

  /// ||A_i||_F^2 for every block.
  Vector block_frobenius_squared() const;

 private:
  Matrix entries_;
  Index block_rows_;
};

/// Immutable problem description. Labels must be +-1 for the logistic loss.
class GlmProblem {
 public:
  GlmProblem(Matrix x, Vector y, double lambda, LossKind loss);

  Index n() const noexcept { return x_.rows(); }
  Index d() const noexcept { return x_.cols(); }
  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  double lambda() const noexcept { return lambda_; }
  LossKind loss() const noexcept { return loss_; }

  /// Same data with a different ridge parameter.
  GlmProblem with_lambda(double lambda) const { return GlmProblem(x_, y_, lambda, loss_); }

 private:
  Matrix x_;
  Vector y_;
  double lambda_;
  LossKind loss_;
};

/// X w, one dot product per row.
Vector margins(const GlmProblem& p, const Vector& w);

double objective(const GlmProblem& p, const Vector& w);
Vector gradient(const GlmProblem& p, const Vector& w);

struct HessianFactorization {
  BlockedMatrix a;
  PsdMatrix q;

  /// A^T A + Q.
  Matrix hessian() const;
};

HessianFactorization hessian_factorization(const GlmProblem& p, const Vector& w);

/// Exact Hessian of the objective at w.
Matrix hessian(const GlmProblem& p, const Vector& w);

}  // namespace ssn
