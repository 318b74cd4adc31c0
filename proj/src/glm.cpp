#include "ssn/glm.hpp"

#include <cmath>
#include <string>

#include "ssn/errors.hpp"
#include "ssn/kernels.hpp"

namespace ssn {

std::string_view to_string(LossKind kind) noexcept {
  return kind == LossKind::logistic ? "logistic" : "squared";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "squared") return LossKind::squared;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

PsiValues psi_derivatives(double u, double y, LossKind kind) noexcept {
  if (kind == LossKind::squared) {
    const double r = u - y;
    return {0.5 * r * r, r, 1.0};
  }
  const double z = u * y;
  // sigma(-z) and sigma(z) from a single exp(-|z|).
  const double e = std::exp(-std::abs(z));
  const double sig_pos = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double sig_neg = z >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  const double value = z >= 0.0 ? std::log1p(e) : -z + std::log1p(e);
  return {value, -y * sig_neg, sig_pos * sig_neg};
}

BlockedMatrix::BlockedMatrix(Matrix entries, Index block_rows) : entries_(std::move(entries)), block_rows_(block_rows) {
  if (block_rows_ < 1) throw DimensionError("block_rows must be >= 1");
  if (entries_.rows() < 1 || entries_.cols() < 1) throw DimensionError("blocked matrix must be non-empty");
  if (entries_.rows() % block_rows_ != 0) {
    throw DimensionError("row count " + std::to_string(entries_.rows()) + " is not a multiple of block_rows " +
                         std::to_string(block_rows_));
  }
}

Vector BlockedMatrix::block_frobenius_squared() const {
  const auto& k = kernels::active();
  const Index n = block_count();
  const auto span = static_cast<std::size_t>(block_rows_ * cols());
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = k.sum_squares(entries_.data() + i * block_rows_ * cols(), span);
  return out;
}

GlmProblem::GlmProblem(Matrix x, Vector y, double lambda, LossKind loss)
    : x_(std::move(x)), y_(std::move(y)), lambda_(lambda), loss_(loss) {
  if (x_.rows() < 1 || x_.cols() < 1) throw DimensionError("data matrix must be non-empty");
  if (y_.size() != x_.rows()) throw DimensionError("label count does not match data rows");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ConfigError("lambda must be finite and >= 0");
  if (!x_.allFinite() || !y_.allFinite()) throw Error("data must be finite");
  if (loss_ == LossKind::logistic) {
    for (Index i = 0; i < y_.size(); ++i) {
      if (y_(i) != 1.0 && y_(i) != -1.0) {
        throw ConfigError("logistic labels must be -1 or +1 (row " + std::to_string(i + 1) + ")");
      }
    }
  }
}

Vector margins(const GlmProblem& p, const Vector& w) {
  if (w.size() != p.d()) throw DimensionError("w has wrong dimension");
  const auto& k = kernels::active();
  const auto d = static_cast<std::size_t>(p.d());
  Vector u(p.n());
  for (Index i = 0; i < p.n(); ++i) u(i) = k.dot(p.x().data() + i * p.d(), w.data(), d);
  return u;
}

double objective(const GlmProblem& p, const Vector& w) {
  const Vector u = margins(p, w);
  double acc = 0.0;
  for (Index i = 0; i < p.n(); ++i) acc += psi_derivatives(u(i), p.y()(i), p.loss()).value;
  acc += p.lambda() * w.squaredNorm();
  if (!std::isfinite(acc)) throw Error("objective overflowed");
  return acc;
}

Vector gradient(const GlmProblem& p, const Vector& w) {
  const Vector u = margins(p, w);
  const auto& k = kernels::active();
  const auto d = static_cast<std::size_t>(p.d());
  Vector g = 2.0 * p.lambda() * w;
  for (Index i = 0; i < p.n(); ++i) {
    const double c = psi_derivatives(u(i), p.y()(i), p.loss()).first;
    if (c != 0.0) k.axpy(c, p.x().data() + i * p.d(), g.data(), d);
  }
  return g;
}

Matrix HessianFactorization::hessian() const {
  Matrix h = Matrix::Zero(a.cols(), a.cols());
  accumulate_gram_upper(a.entries(), {}, {}, h);
  mirror_upper(h);
  q.add_to(h);
  return h;
}

HessianFactorization hessian_factorization(const GlmProblem& p, const Vector& w) {
  const Vector u = margins(p, w);
  Matrix a = p.x();
  for (Index i = 0; i < p.n(); ++i) a.row(i) *= std::sqrt(psi_derivatives(u(i), p.y()(i), p.loss()).second);
  return {BlockedMatrix(std::move(a), 1), PsdMatrix::scaled_identity(p.d(), 2.0 * p.lambda())};
}

Matrix hessian(const GlmProblem& p, const Vector& w) { return hessian_factorization(p, w).hessian(); }

}  // namespace ssn
