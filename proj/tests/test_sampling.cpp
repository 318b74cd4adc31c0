#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssn/diagnostics.hpp"
#include "ssn/errors.hpp"
#include "ssn/sampling.hpp"

using namespace ssn;

TEST_CASE("uniform and block norm squares distributions") {
  CHECK(uniform_distribution(4) == Vector::Constant(4, 0.25));
  Matrix m(4, 2);
  m << 1, 0, 0, 1, 2, 0, 0, 0;
  const Vector p = block_norm_squares_distribution(BlockedMatrix(m, 2));
  CHECK(p(0) == doctest::Approx(2.0 / 6.0));
  CHECK(p(1) == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(block_norm_squares_distribution(BlockedMatrix(Matrix::Zero(2, 2), 1)), DegenerateInputError);
}

TEST_CASE("exact block partial leverage scores match the SVD oracle") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 30; ++trial) {
    const Index k = 1 + trial % 3;
    const Index d = 2 + trial % 7;
    const Index n = 5 + trial * 3;
    const double lambda = trial % 2 ? 0.1 : 0.0;
    const Matrix a = oracle::random_matrix(n * k, d, rng);
    const PsdMatrix q = PsdMatrix::scaled_identity(d, 2.0 * lambda);
    const LeverageScores s = exact_block_partial_leverage_scores(BlockedMatrix(a, k), q);
    const Vector ref = oracle::block_leverage_oracle(a, k, q.matrix());
    CAPTURE(trial);
    CHECK((s.tau - ref).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(s.sum() <= static_cast<double>(d) + 1e-9);
    CHECK_FALSE(s.is_approximate);
    CHECK((s.tau.array() >= -1e-15).all());
  }
}

TEST_CASE("leverage scores: identity, rank deficiency and the large-lambda limit") {
  const LeverageScores id = exact_block_partial_leverage_scores(BlockedMatrix(Matrix::Identity(3, 3), 1),
                                                                PsdMatrix::zero(3));
  for (Index i = 0; i < 3; ++i) CHECK(id.tau(i) == doctest::Approx(1.0));
  CHECK(id.sum() == doctest::Approx(3.0));

  // Rank 1 matrix in d = 3 without regularization: pseudo-inverse semantics.
  Matrix r1(4, 3);
  r1 << 1, 2, 3, 2, 4, 6, 0, 0, 0, -1, -2, -3;
  const LeverageScores def = exact_block_partial_leverage_scores(BlockedMatrix(r1, 1), PsdMatrix::zero(3));
  CHECK((def.tau - oracle::svd_row_leverage(r1)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(def.sum() == doctest::Approx(1.0));

  std::mt19937_64 rng(31);
  const Matrix a = oracle::random_matrix(40, 4, rng);
  const double lambda = 1e6;
  const LeverageScores big =
      exact_block_partial_leverage_scores(BlockedMatrix(a, 1), PsdMatrix::scaled_identity(4, 2.0 * lambda));
  for (Index i = 0; i < 40; ++i) {
    CHECK(big.tau(i) == doctest::Approx(a.row(i).squaredNorm() / (2.0 * lambda)).epsilon(1e-4));
  }
  CHECK(big.sum() == doctest::Approx(a.squaredNorm() / (2.0 * lambda)).epsilon(1e-4));
}

TEST_CASE("fast leverage scores overestimate within the safety band") {
  std::mt19937_64 rng(32);
  const Matrix a = oracle::random_matrix(500, 10, rng);
  const BlockedMatrix b(a, 1);
  const PsdMatrix q = PsdMatrix::scaled_identity(10, 0.02);
  const LeverageScores exact = exact_block_partial_leverage_scores(b, q);
  FastLeverageOptions opts;
  opts.seed = 77;
  const LeverageScores fast = fast_block_partial_leverage_scores(b, q, opts);
  CHECK(fast.is_approximate);
  CHECK(fast.beta_bound > opts.beta_safety);
  int inside = 0;
  for (Index i = 0; i < 500; ++i) {
    const double ratio = fast.tau(i) / exact.tau(i);
    inside += ratio >= 1.0 && ratio <= opts.beta_safety * 1.5;
  }
  CHECK(inside >= 475);

  FastLeverageOptions small = opts;
  small.sketch_rows = 50;
  CHECK_THROWS_AS(fast_block_partial_leverage_scores(b, q, small), ConfigError);

  // Identity embedding reproduces exact scores times beta.
  const Index rows = a.rows() + 10;
  const LeverageScores ident = fast_block_partial_leverage_scores(b, q, SparseEmbedding::identity(rows), 1.0);
  CHECK((ident.tau - exact.tau).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("sampling sizes evaluate the stated bounds and round up") {
  const double lev = sampling_size_leverage_raw(10.0, 20, 0.5, 0.1);
  CHECK(lev == doctest::Approx(4.0 * 10.0 * std::log(800.0) / 0.25));
  CHECK(sampling_size_leverage(10.0, 20, 0.5, 0.1) == static_cast<Index>(std::ceil(lev)));

  CHECK(sampling_size_block_norms_raw(2.0, 20, 0.5, 0.1) == doctest::Approx(4.0 * 2.0 * std::log(80.0) / 0.25));
  CHECK(sampling_size_block_norms_raw(10.0, 20, 0.5, 0.1) == doctest::Approx(4.0 * 10.0 * std::log(200.0) / 0.25));

  // Uniform bound on n equal orthogonal rows: max ||A_i||^2 / ||A||^2 = 1.
  const Matrix eye = Matrix::Identity(4, 4);
  CHECK(sampling_size_uniform_raw(BlockedMatrix(eye, 1), 4, 0.5, 0.1) ==
        doctest::Approx(4.0 * 4.0 * std::log(40.0) / 0.25));

  CHECK_THROWS_AS(sampling_size_leverage(10.0, 20, 0.0, 0.1), ConfigError);
  CHECK_THROWS_AS(sampling_size_leverage(10.0, 20, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(sampling_size_block_norms(0.5, 20, 0.5, 0.1), ConfigError);
  CHECK(stable_rank(BlockedMatrix(eye, 1)) == doctest::Approx(4.0));
}

TEST_CASE("sampling plan inclusion probabilities and Bernoulli draws") {
  Vector p(4);
  p << 0.5, 0.25, 0.125, 0.125;
  const SamplingPlan plan = SamplingPlan::make(Scheme::block_norm_squares, p, 3.0, 5);
  CHECK(plan.q(0) == 1.0);
  CHECK(plan.q(1) == 0.75);
  CHECK(plan.q(2) == 0.375);
  CHECK(plan.expected_kept() == doctest::Approx(2.5));
  CHECK_THROWS_AS(SamplingPlan::make(Scheme::uniform, Vector::Constant(4, 0.3), 2.0, 0), ConfigError);
  CHECK_THROWS_AS(SamplingPlan::make(Scheme::uniform, p, 0.0, 0), ConfigError);

  const BlockSample a = draw_block_sample(plan, 123);
  const BlockSample b = draw_block_sample(plan, 123);
  CHECK(a.kept == b.kept);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.inclusion[j] == plan.q(static_cast<Index>(a.kept[j])));
    CHECK(a.scale[j] == doctest::Approx(1.0 / std::sqrt(a.inclusion[j])));
    CHECK(a.weights()[j] == doctest::Approx(1.0 / a.inclusion[j]));
  }

  std::vector<int> counts(4, 0);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    try {
      for (auto i : draw_block_sample(plan, 1000 + r).kept) ++counts[i];
    } catch (const EmptySampleError&) {
    }
  }
  for (Index i = 0; i < 4; ++i) {
    const double qi = plan.q(i);
    const double sd = std::sqrt(qi * (1 - qi) / reps);
    CHECK(std::abs(counts[i] / double(reps) - qi) <= 5 * sd + 1e-12);
  }
}

TEST_CASE("empty draws raise and the retrying draw recovers") {
  const SamplingPlan tiny = SamplingPlan::make(Scheme::uniform, uniform_distribution(1000), 1e-6, 1);
  CHECK_THROWS_AS(draw_block_sample(tiny), EmptySampleError);
  CHECK_THROWS_AS(draw_block_sample_retrying(tiny, 3), EmptySampleError);
  const SamplingPlan half = SamplingPlan::make(Scheme::uniform, uniform_distribution(1), 0.5, 1);
  CHECK_NOTHROW(draw_block_sample_retrying(half, 60));
  CHECK(BlockSample::all(3).kept == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("sub-sampled Hessian is unbiased: exhaustive enumeration over inclusion patterns") {
  std::mt19937_64 rng(33);
  const Index n = 10, d = 3;
  Matrix a = oracle::random_matrix(n, d, rng);
  a.row(0) *= 5.0;
  const BlockedMatrix b(a, 1);
  const PsdMatrix q = PsdMatrix::scaled_identity(d, 0.2);
  const Matrix h = a.transpose() * a + q.matrix();
  for (Scheme s : {Scheme::uniform, Scheme::block_norm_squares, Scheme::block_partial_leverage}) {
    Vector p = s == Scheme::uniform              ? uniform_distribution(n)
               : s == Scheme::block_norm_squares ? block_norm_squares_distribution(b)
                                                 : leverage_distribution(exact_block_partial_leverage_scores(b, q));
    const SamplingPlan plan = SamplingPlan::make(s, p, 4.0, 0);
    Matrix expected = Matrix::Zero(d, d);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      double prob = 1.0;
      BlockSample smp;
      for (Index i = 0; i < n; ++i) {
        const bool in = mask & (1u << i);
        prob *= in ? plan.q(i) : 1.0 - plan.q(i);
        if (in) {
          smp.kept.push_back(static_cast<std::size_t>(i));
          smp.inclusion.push_back(plan.q(i));
          smp.scale.push_back(1.0 / std::sqrt(plan.q(i)));
        }
      }
      if (prob == 0.0) continue;
      expected += prob * (smp.empty() ? q.matrix() : sampled_hessian(b, q, smp));
    }
    CAPTURE(to_string(s));
    CHECK((expected - h).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
  }
}
