#pragma once

// Dense linear-algebra building blocks: storage aliases, PSD regularizers,
// thin QR, Cholesky and CG solves, the sparse +-1 subspace embedding and
// symmetric eigenvalue extremes.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ssn {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Relative tolerance used to accept slightly negative eigenvalues as PSD.
inline constexpr double kPsdTolerance = 1e-10;

/// Symmetric positive semi-definite d x d matrix, typically the regularizer Q.
class PsdMatrix {
 public:
  /// Validates squareness, finiteness, symmetry (to 1e-12 relative) and
  /// PSD-ness (lambda_min >= -kPsdTolerance * lambda_max); stores the exact
  /// symmetric part.
  explicit PsdMatrix(const Matrix& m);

  static PsdMatrix scaled_identity(Index dim, double scale);
  static PsdMatrix zero(Index dim) { return scaled_identity(dim, 0.0); }

  Index dim() const noexcept { return matrix_.rows(); }
  const Matrix& matrix() const noexcept { return matrix_; }

  /// True when the matrix is c * I (including c = 0); `identity_scale` is c.
  bool is_scaled_identity() const noexcept { return identity_scale_ >= 0.0; }
  double identity_scale() const noexcept { return identity_scale_; }
  bool is_zero() const noexcept { return identity_scale_ == 0.0; }

  /// Symmetric square root. Analytic for c * I, otherwise by
  /// eigendecomposition with negative eigenvalues clamped to zero.
  Matrix sqrt() const;

  /// out += Q v
  void apply_add(const Vector& v, Vector& out) const;

  /// h += Q
  void add_to(Matrix& h) const;

 private:
  PsdMatrix(Matrix m, double identity_scale) : matrix_(std::move(m)), identity_scale_(identity_scale) {}

  Matrix matrix_;
  double identity_scale_ = -1.0;
};

struct ThinQr {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular with non-negative diagonal
};

/// Householder thin QR of a tall matrix. Throws SingularMatrixError when some
/// |R_ii| < 1e-12 * ||M||_F, DimensionError when rows < cols.
ThinQr qr_thin(const Matrix& m);

/// Upper-triangular R factor only; same error contract as qr_thin.
Matrix qr_r_factor(const Matrix& m);

/// Solves M x = b for symmetric positive definite M. Throws
/// IndefiniteMatrixError on a non-positive pivot.
Vector cholesky_solve(const Matrix& m, const Vector& b);

/// out = M v for a symmetric operator.
using LinearOperator = std::function<void(const Vector& v, Vector& out)>;

struct CgResult {
  Vector x;
  int iters = 0;
  double residual = 0.0;  // true ||b - M x|| / ||b|| at exit
  bool converged = false;
};

/// Plain conjugate gradient from x0 = 0, stopped on relative residual
/// ||M x - b|| / ||b|| <= rel_tol or after max_iters iterations. Throws
/// IndefiniteMatrixError when a search direction has curvature below
/// -1e-14 * ||p||^2. `observer`, when set, sees every iterate.
CgResult conjugate_gradient(const LinearOperator& apply, const Vector& b, double rel_tol, int max_iters,
                            const std::function<void(int, const Vector&)>& observer = {});

/// Sparse embedding with one +-1 per input row (CountSketch form): input row
/// i is added, with sign sign_map[i], to output row column_map[i].
class SparseEmbedding {
 public:
  SparseEmbedding(Index input_rows, Index target_rows, std::uint64_t seed);

  static SparseEmbedding identity(Index rows);

  Index input_rows() const noexcept { return static_cast<Index>(column_map_.size()); }
  Index target_rows() const noexcept { return target_rows_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const Index> column_map() const noexcept { return column_map_; }
  std::span<const std::int8_t> sign_map() const noexcept { return sign_map_; }

  /// Pi * M in one pass over the nonzero rows of M.
  Matrix apply(const Matrix& m) const;

 private:
  SparseEmbedding() = default;

  Index target_rows_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Index> column_map_;
  std::vector<std::int8_t> sign_map_;
};

struct EigExtremes {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix from a full dense eigensolve.
EigExtremes symmetric_eig_extremes(const Matrix& m);

/// max |lambda| of a symmetric matrix.
double symmetric_spectral_norm(const Matrix& m);

/// Spectral norm (largest singular value) of a general matrix.
double spectral_norm(const Matrix& m);

/// h += sum_j w_j a_j a_j^T over rows a_j = rows.row(index[j]); writes the
/// upper triangle only. Empty `index` means every row, empty `weights` unit weights.
void accumulate_gram_upper(const Matrix& rows, std::span<const std::size_t> index,
                           std::span<const double> weights, Matrix& h);

/// Copies the upper triangle onto the lower one.
void mirror_upper(Matrix& h);

/// Full symmetric sum_j w_j a_j a_j^T.
Matrix weighted_gram(const Matrix& rows, std::span<const std::size_t> index = {},
                     std::span<const double> weights = {});

}  // namespace ssn
