#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssn/errors.hpp"
#include "ssn/kernels.hpp"
#include "ssn/linalg.hpp"

using namespace ssn;

TEST_CASE("qr_thin: identity and a single column") {
  const ThinQr id = qr_thin(Matrix::Identity(2, 2));
  CHECK((id.q.cwiseAbs() - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
  CHECK((id.r.cwiseAbs() - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));

  Matrix m(2, 1);
  m << 3, 4;
  const ThinQr col = qr_thin(m);
  CHECK(std::abs(col.r(0, 0)) == doctest::Approx(5.0));
}

TEST_CASE("qr_thin: orthonormal factor, triangular R, reconstruction") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_matrix(20, 5, rng);
    const ThinQr f = qr_thin(m);
    REQUIRE(f.q.rows() == 20);
    REQUIRE(f.r.rows() == 5);
    CHECK((f.q.transpose() * f.q - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((f.q * f.r - m).norm() / m.norm() <= 1e-12);
    for (Index i = 0; i < 5; ++i) {
      CHECK(f.r(i, i) > 0.0);
      for (Index j = 0; j < i; ++j) CHECK(f.r(i, j) == 0.0);
    }
    CHECK((qr_r_factor(m) - f.r).norm() <= 1e-12 * f.r.norm());
  }
}

TEST_CASE("qr_thin: rank deficiency and wide input are rejected") {
  Matrix m(4, 2);
  m << 1, 2, 2, 4, 3, 6, 4, 8;
  CHECK_THROWS_AS(qr_thin(m), SingularMatrixError);
  CHECK_THROWS_AS(qr_r_factor(m), SingularMatrixError);
  CHECK_THROWS_AS(qr_thin(Matrix::Ones(2, 3)), DimensionError);
}

TEST_CASE("cholesky_solve and conjugate_gradient agree on SPD systems") {
  std::mt19937_64 rng(2);
  const Matrix b = oracle::random_matrix(30, 8, rng);
  const Matrix spd = b.transpose() * b + 0.1 * Matrix::Identity(8, 8);
  const Vector rhs = oracle::random_vector(8, rng);
  const Vector x = cholesky_solve(spd, rhs);
  CHECK((spd * x - rhs).norm() / rhs.norm() <= 1e-12);

  const LinearOperator op = [&spd](const Vector& v, Vector& out) { out = spd * v; };
  const CgResult cg = conjugate_gradient(op, rhs, 1e-12, 100);
  CHECK(cg.converged);
  CHECK(cg.residual <= 1e-12);
  CHECK((cg.x - x).norm() <= 1e-8 * x.norm());

  const CgResult loose = conjugate_gradient(op, rhs, 1e-6, 100);
  CHECK(loose.residual <= 1e-6);
  CHECK((spd * loose.x - rhs).norm() / rhs.norm() == doctest::Approx(loose.residual).epsilon(1e-6));
}

TEST_CASE("conjugate_gradient: zero right-hand side, iteration cap and negative curvature") {
  const Matrix spd = Matrix::Identity(3, 3);
  const LinearOperator op = [&spd](const Vector& v, Vector& out) { out = spd * v; };
  const CgResult zero = conjugate_gradient(op, Vector::Zero(3), 1e-6, 10);
  CHECK(zero.iters == 0);
  CHECK(zero.x.norm() == 0.0);

  Matrix ill = Matrix::Identity(6, 6);
  for (Index i = 0; i < 6; ++i) ill(i, i) = std::pow(10.0, i);
  const LinearOperator op2 = [&ill](const Vector& v, Vector& out) { out = ill * v; };
  const CgResult capped = conjugate_gradient(op2, Vector::Ones(6), 1e-14, 2);
  CHECK(capped.iters == 2);
  CHECK_FALSE(capped.converged);

  Matrix indef = Matrix::Identity(2, 2);
  indef(1, 1) = -1.0;
  const LinearOperator op3 = [&indef](const Vector& v, Vector& out) { out = indef * v; };
  Vector rhs(2);
  rhs << 0.0, 1.0;
  CHECK_THROWS_AS(conjugate_gradient(op3, rhs, 1e-8, 10), IndefiniteMatrixError);
  CHECK_THROWS_AS(cholesky_solve(indef, rhs), IndefiniteMatrixError);
}

TEST_CASE("PsdMatrix validates symmetry and semi-definiteness") {
  Matrix sym(2, 2);
  sym << 2, 1, 1, 2;
  const PsdMatrix p(sym);
  CHECK_FALSE(p.is_scaled_identity());
  const Matrix root = p.sqrt();
  CHECK((root * root - sym).norm() <= 1e-12);

  Matrix asym = sym;
  asym(0, 1) = 1.5;
  CHECK_THROWS_AS(PsdMatrix{asym}, Error);
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(PsdMatrix{indef}, IndefiniteMatrixError);

  const PsdMatrix q = PsdMatrix::scaled_identity(3, 0.5);
  CHECK(q.is_scaled_identity());
  CHECK(q.identity_scale() == 0.5);
  CHECK((q.sqrt() - std::sqrt(0.5) * Matrix::Identity(3, 3)).norm() <= 1e-15);
  Vector out = Vector::Ones(3);
  q.apply_add(Vector::Constant(3, 2.0), out);
  CHECK((out - Vector::Constant(3, 2.0)).norm() == 0.0);
  CHECK(PsdMatrix::zero(4).is_zero());
  CHECK(PsdMatrix(Matrix::Identity(3, 3) * 2.0).is_scaled_identity());
}

TEST_CASE("SparseEmbedding: one target per row with +-1 signs, single-pass apply") {
  const SparseEmbedding s(50, 7, 42);
  CHECK(s.target_rows() == 7);
  REQUIRE(s.column_map().size() == 50);
  for (Index i = 0; i < 50; ++i) {
    CHECK(s.column_map()[i] >= 0);
    CHECK(s.column_map()[i] < 7);
    CHECK(std::abs(s.sign_map()[i]) == 1);
  }
  std::mt19937_64 rng(5);
  const Matrix m = oracle::random_matrix(50, 4, rng);
  Matrix dense = Matrix::Zero(7, 50);
  for (Index i = 0; i < 50; ++i) dense(s.column_map()[i], i) = s.sign_map()[i];
  CHECK((s.apply(m) - dense * m).norm() <= 1e-13 * m.norm());

  const SparseEmbedding same(50, 7, 42);
  CHECK(std::equal(s.column_map().begin(), s.column_map().end(), same.column_map().begin()));
  CHECK((SparseEmbedding::identity(50).apply(m) - m).norm() == 0.0);
  CHECK_THROWS_AS(s.apply(oracle::random_matrix(49, 4, rng)), DimensionError);
}

TEST_CASE("SparseEmbedding preserves norms in expectation") {
  std::mt19937_64 rng(8);
  const Vector x = oracle::random_vector(200, rng);
  Matrix col = x;
  double acc = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) acc += SparseEmbedding(200, 20, 1000 + r).apply(col).squaredNorm();
  CHECK(acc / reps == doctest::Approx(x.squaredNorm()).epsilon(0.05));
}

TEST_CASE("eigenvalue extremes and spectral norms match SVD oracles") {
  std::mt19937_64 rng(9);
  const Matrix a = oracle::random_matrix(12, 5, rng);
  const Matrix g = a.transpose() * a;
  const EigExtremes e = symmetric_eig_extremes(g);
  CHECK(e.max == doctest::Approx(std::pow(oracle::spectral_norm(a), 2)).epsilon(1e-12));
  CHECK(e.min == doctest::Approx(oracle::min_eig(g)).epsilon(1e-10));
  CHECK(symmetric_spectral_norm(-g) == doctest::Approx(e.max).epsilon(1e-12));
  CHECK(spectral_norm(a) == doctest::Approx(oracle::spectral_norm(a)).epsilon(1e-12));
  CHECK(spectral_norm(Matrix(a.transpose())) == doctest::Approx(oracle::spectral_norm(a)).epsilon(1e-12));
}

TEST_CASE("weighted_gram matches explicit products") {
  std::mt19937_64 rng(10);
  const Matrix a = oracle::random_matrix(9, 4, rng);
  const std::vector<std::size_t> idx{0, 3, 3, 8};
  const std::vector<double> w{1.0, 2.0, 0.5, 3.0};
  Matrix ref = Matrix::Zero(4, 4);
  for (std::size_t j = 0; j < idx.size(); ++j) ref += w[j] * a.row(idx[j]).transpose() * a.row(idx[j]);
  CHECK((weighted_gram(a, idx, w) - ref).norm() <= 1e-13 * ref.norm());
  CHECK((weighted_gram(a) - a.transpose() * a).norm() <= 1e-13 * a.squaredNorm());
  CHECK_THROWS_AS(weighted_gram(a, idx, std::vector<double>{1.0}), DimensionError);
}
