#include "ssn/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ssn/errors.hpp"
#include "ssn/kernels.hpp"

namespace ssn {
namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

PsdMatrix::PsdMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw DimensionError("PsdMatrix must be square and non-empty");
  if (!all_finite(m)) throw Error("PsdMatrix entries must be finite");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error("PsdMatrix input is not symmetric");
  }
  matrix_ = 0.5 * (m + m.transpose());
  const EigExtremes ext = symmetric_eig_extremes(matrix_);
  if (ext.min < -kPsdTolerance * std::max(std::abs(ext.max), 1e-300)) {
    throw IndefiniteMatrixError("PsdMatrix has eigenvalue " + std::to_string(ext.min));
  }
  const double diag0 = matrix_(0, 0);
  const Matrix ident = diag0 * Matrix::Identity(m.rows(), m.cols());
  if (diag0 >= 0.0 && matrix_ == ident) identity_scale_ = diag0;
}

PsdMatrix PsdMatrix::scaled_identity(Index dim, double scale) {
  if (dim < 1) throw DimensionError("PsdMatrix dimension must be positive");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("identity scale must be finite and >= 0");
  return PsdMatrix(scale * Matrix::Identity(dim, dim), scale);
}

Matrix PsdMatrix::sqrt() const {
  if (is_scaled_identity()) return std::sqrt(identity_scale_) * Matrix::Identity(dim(), dim());
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void PsdMatrix::apply_add(const Vector& v, Vector& out) const {
  if (is_scaled_identity()) {
    if (identity_scale_ != 0.0) out += identity_scale_ * v;
    return;
  }
  out.noalias() += matrix_ * v;
}

void PsdMatrix::add_to(Matrix& h) const {
  if (is_scaled_identity()) {
    h.diagonal().array() += identity_scale_;
    return;
  }
  h += matrix_;
}

Matrix qr_r_factor(const Matrix& m) {
  if (m.rows() < m.cols()) throw DimensionError("qr_thin requires rows >= cols");
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  const double fro = m.norm();
  for (Index i = 0; i < r.rows(); ++i) {
    if (!(std::abs(r(i, i)) >= 1e-12 * fro) || fro == 0.0) {
      throw SingularMatrixError("rank-deficient input to QR (|R_" + std::to_string(i) + std::to_string(i) +
                                "| below 1e-12 ||M||_F)");
    }
    if (r(i, i) < 0.0) r.row(i) *= -1.0;
  }
  return r;
}

ThinQr qr_thin(const Matrix& m) {
  if (m.rows() < m.cols()) throw DimensionError("qr_thin requires rows >= cols");
  Eigen::HouseholderQR<Matrix> qr(m);
  ThinQr out;
  out.r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const double fro = m.norm();
  for (Index i = 0; i < out.r.rows(); ++i) {
    if (!(std::abs(out.r(i, i)) >= 1e-12 * fro) || fro == 0.0) {
      throw SingularMatrixError("rank-deficient input to QR");
    }
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

Vector cholesky_solve(const Matrix& m, const Vector& b) {
  if (m.rows() != m.cols() || m.rows() != b.size()) throw DimensionError("cholesky_solve dimension mismatch");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw IndefiniteMatrixError("Cholesky met a non-positive pivot");
  return llt.solve(b);
}

CgResult conjugate_gradient(const LinearOperator& apply, const Vector& b, double rel_tol, int max_iters,
                            const std::function<void(int, const Vector&)>& observer) {
  const Index n = b.size();
  CgResult res;
  res.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Vector r = b;
  Vector p = r;
  Vector mp(n);
  double rr = r.squaredNorm();
  if (observer) observer(0, res.x);
  while (res.iters < max_iters) {
    if (std::sqrt(rr) <= rel_tol * bnorm) break;
    mp.setZero();
    apply(p, mp);
    const double curvature = p.dot(mp);
    const double pp = p.squaredNorm();
    if (curvature < -1e-14 * pp) {
      throw IndefiniteMatrixError("CG breakdown: negative curvature " + std::to_string(curvature));
    }
    if (curvature <= 0.0) break;
    const double alpha = rr / curvature;
    res.x += alpha * p;
    r -= alpha * mp;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    ++res.iters;
    if (observer) observer(res.iters, res.x);
  }
  mp.setZero();
  apply(res.x, mp);
  res.residual = (b - mp).norm() / bnorm;
  res.converged = res.residual <= rel_tol;
  return res;
}

SparseEmbedding::SparseEmbedding(Index input_rows, Index target_rows, std::uint64_t seed)
    : target_rows_(target_rows), seed_(seed) {
  if (input_rows < 1 || target_rows < 1) throw ConfigError("sparse embedding sizes must be positive");
  std::mt19937_64 rng(seed);
  column_map_.resize(static_cast<std::size_t>(input_rows));
  sign_map_.resize(static_cast<std::size_t>(input_rows));
  const auto m = static_cast<std::uint64_t>(target_rows);
  for (std::size_t i = 0; i < column_map_.size(); ++i) {
    const std::uint64_t word = rng();
    column_map_[i] = static_cast<Index>((word >> 1) % m);
    sign_map_[i] = (word & 1U) ? std::int8_t{1} : std::int8_t{-1};
  }
}

SparseEmbedding SparseEmbedding::identity(Index rows) {
  SparseEmbedding e;
  e.target_rows_ = rows;
  e.column_map_.resize(static_cast<std::size_t>(rows));
  e.sign_map_.assign(static_cast<std::size_t>(rows), std::int8_t{1});
  for (Index i = 0; i < rows; ++i) e.column_map_[static_cast<std::size_t>(i)] = i;
  return e;
}

Matrix SparseEmbedding::apply(const Matrix& m) const {
  if (m.rows() != input_rows()) {
    throw DimensionError("sparse embedding built for " + std::to_string(input_rows()) + " rows, got " +
                         std::to_string(m.rows()));
  }
  const auto& k = kernels::active();
  const auto d = static_cast<std::size_t>(m.cols());
  Matrix out = Matrix::Zero(target_rows_, m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const double* row = m.data() + i * m.cols();
    bool nonzero = false;
    for (std::size_t c = 0; c < d && !nonzero; ++c) nonzero = row[c] != 0.0;
    if (!nonzero) continue;
    const auto ui = static_cast<std::size_t>(i);
    k.axpy(static_cast<double>(sign_map_[ui]), row, out.data() + column_map_[ui] * m.cols(), d);
  }
  return out;
}

EigExtremes symmetric_eig_extremes(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw DimensionError("eigensolve needs a square matrix");
  if (!m.allFinite()) throw Error("eigensolve on non-finite input");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("symmetric eigensolve did not converge");
  return {es.eigenvalues()(0), es.eigenvalues()(m.rows() - 1)};
}

double symmetric_spectral_norm(const Matrix& m) {
  const EigExtremes e = symmetric_eig_extremes(m);
  return std::max(std::abs(e.min), std::abs(e.max));
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // Gram matrix on the short side, exact enough for norms at desk scale.
  if (m.rows() >= m.cols()) return std::sqrt(std::max(0.0, symmetric_eig_extremes(m.transpose() * m).max));
  return std::sqrt(std::max(0.0, symmetric_eig_extremes(m * m.transpose()).max));
}

void accumulate_gram_upper(const Matrix& rows, std::span<const std::size_t> index,
                           std::span<const double> weights, Matrix& h) {
  const auto d = static_cast<std::size_t>(rows.cols());
  if (h.rows() != rows.cols() || h.cols() != rows.cols()) throw DimensionError("gram accumulator size mismatch");
  const std::size_t count = index.empty() ? static_cast<std::size_t>(rows.rows()) : index.size();
  if (!weights.empty() && weights.size() != count) throw DimensionError("gram weights size mismatch");
  kernels::active().gram_upper(rows.data(), d, index.empty() ? nullptr : index.data(),
                               weights.empty() ? nullptr : weights.data(), count, d, h.data());
}

void mirror_upper(Matrix& h) {
  for (Index r = 1; r < h.rows(); ++r)
    for (Index c = 0; c < r; ++c) h(r, c) = h(c, r);
}

Matrix weighted_gram(const Matrix& rows, std::span<const std::size_t> index, std::span<const double> weights) {
  Matrix h = Matrix::Zero(rows.cols(), rows.cols());
  accumulate_gram_upper(rows, index, weights, h);
  mirror_upper(h);
  return h;
}

}  // namespace ssn
