#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssn/errors.hpp"
#include "ssn/glm.hpp"

using namespace ssn;

namespace {

GlmProblem random_problem(std::mt19937_64& rng, Index n, Index d, double lambda, LossKind loss) {
  Matrix x = oracle::random_matrix(n, d, rng);
  Vector y = loss == LossKind::logistic ? oracle::random_labels(n, rng) : oracle::random_vector(n, rng);
  return GlmProblem(std::move(x), std::move(y), lambda, loss);
}

}  // namespace

TEST_CASE("psi derivatives match the closed forms and stay finite at extreme margins") {
  for (double u : {-800.0, -30.0, -1.0, 0.0, 0.5, 30.0, 800.0}) {
    for (double y : {-1.0, 1.0}) {
      const PsiValues v = psi_derivatives(u, y, LossKind::logistic);
      CHECK(std::isfinite(v.value));
      CHECK(v.value >= 0.0);
      CHECK(v.second >= 0.0);
      CHECK(v.second <= 0.25);
      const long double z = static_cast<long double>(u) * y;
      const long double sig = 1.0L / (1.0L + std::exp(z));  // sigma(-z)
      if (std::abs(u) <= 30.0) {
        CHECK(v.value == doctest::Approx(static_cast<double>(std::log1p(std::exp(-z)))).epsilon(1e-14));
        CHECK(v.first == doctest::Approx(static_cast<double>(-y * sig)).epsilon(1e-14));
        CHECK(v.second == doctest::Approx(static_cast<double>(sig * (1.0L - sig))).epsilon(1e-13));
      }
    }
  }
  CHECK(psi_derivatives(0.0, 1.0, LossKind::logistic).second == 0.25);
  CHECK(psi_derivatives(800.0, -1.0, LossKind::logistic).value == doctest::Approx(800.0));
  const PsiValues sq = psi_derivatives(3.0, 1.0, LossKind::squared);
  CHECK(sq.value == 2.0);
  CHECK(sq.first == 2.0);
  CHECK(sq.second == 1.0);
}

TEST_CASE("objective, gradient and Hessian agree with finite differences on 20 instances") {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const LossKind loss = trial % 4 == 3 ? LossKind::squared : LossKind::logistic;
    const GlmProblem p = random_problem(rng, 30 + trial, 2 + trial % 6, trial % 2 ? 0.1 : 0.0, loss);
    const Vector w = oracle::random_vector(p.d(), rng, 0.5);
    CAPTURE(trial);
    CHECK(objective(p, w) == doctest::Approx(static_cast<double>(oracle::objective_ld(p, w))).epsilon(1e-13));

    const Vector g = gradient(p, w);
    const Vector g_fd = oracle::fd_gradient([&p](const Vector& v) { return objective(p, v); }, w, 1e-5);
    CHECK((g - g_fd).norm() / g.norm() <= 1e-6);

    const Matrix h = hessian(p, w);
    const Matrix h_fd = oracle::fd_jacobian([&p](const Vector& v) { return gradient(p, v); }, w, 1e-5);
    CHECK((h - h_fd).norm() / h.norm() <= 1e-5);
  }
}

TEST_CASE("Hessian factorization: A = D X with k = 1 and Q = 2 lambda I") {
  std::mt19937_64 rng(21);
  const GlmProblem p = random_problem(rng, 15, 4, 0.3, LossKind::logistic);
  const Vector w = oracle::random_vector(4, rng);
  const HessianFactorization f = hessian_factorization(p, w);
  CHECK(f.a.block_rows() == 1);
  CHECK(f.a.block_count() == 15);
  CHECK(f.q.is_scaled_identity());
  CHECK(f.q.identity_scale() == doctest::Approx(0.6));
  const Matrix ref = f.a.entries().transpose() * f.a.entries() + 0.6 * Matrix::Identity(4, 4);
  CHECK((f.hessian() - ref).norm() <= 1e-13 * ref.norm());
  const Vector u = p.x() * w;
  for (Index i = 0; i < 15; ++i) {
    const double s = std::sqrt(psi_derivatives(u(i), p.y()(i), LossKind::logistic).second);
    CHECK((f.a.entries().row(i) - s * p.x().row(i)).norm() <= 1e-15 * (1 + p.x().row(i).norm()));
  }
}

TEST_CASE("squared loss Hessian is X^T X + 2 lambda I independent of w") {
  std::mt19937_64 rng(22);
  const GlmProblem p = random_problem(rng, 12, 3, 0.25, LossKind::squared);
  const Matrix ref = p.x().transpose() * p.x() + 0.5 * Matrix::Identity(3, 3);
  for (int k = 0; k < 3; ++k) {
    CHECK((hessian(p, oracle::random_vector(3, rng)) - ref).norm() <= 1e-12 * ref.norm());
  }
}

TEST_CASE("BlockedMatrix blocks and Frobenius norms") {
  Matrix m(6, 2);
  m << 1, 0, 0, 1, 2, 2, 0, 0, 3, 4, 1, 1;
  const BlockedMatrix b(m, 2);
  CHECK(b.block_count() == 3);
  CHECK(b.block(1).rows() == 2);
  CHECK(b.block(2)(0, 1) == 4.0);
  const Vector fro = b.block_frobenius_squared();
  CHECK(fro(0) == 2.0);
  CHECK(fro(1) == 8.0);
  CHECK(fro(2) == 27.0);
  CHECK_THROWS_AS(BlockedMatrix(m, 4), DimensionError);
  CHECK_THROWS_AS(BlockedMatrix(m, 0), DimensionError);
}

TEST_CASE("GlmProblem validation") {
  Matrix x = Matrix::Ones(3, 2);
  Vector y(3);
  y << 1, -1, 0;
  CHECK_THROWS_AS(GlmProblem(x, y, 0.1, LossKind::logistic), ConfigError);
  CHECK_NOTHROW(GlmProblem(x, y, 0.1, LossKind::squared));
  y(2) = 1;
  CHECK_THROWS_AS(GlmProblem(x, y, -1.0, LossKind::logistic), ConfigError);
  CHECK_THROWS_AS(GlmProblem(x, Vector::Ones(2), 0.1, LossKind::logistic), DimensionError);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), ConfigError);
  const GlmProblem p(x, y, 0.1, LossKind::logistic);
  CHECK(p.with_lambda(2.0).lambda() == 2.0);
  CHECK_THROWS_AS(gradient(p, Vector::Zero(3)), DimensionError);
}
