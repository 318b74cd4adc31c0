#pragma once

// Block sampling distributions over the augmented matrix A = [A_1; ...; A_n],
// theoretical sampling-size bounds, and independent Bernoulli block sampling
// with inclusion probabilities q_i = min(s p_i, 1).

#include <cstdint>
#include <string_view>
#include <vector>

#include "ssn/glm.hpp"
#include "ssn/linalg.hpp"

namespace ssn {

enum class Scheme { uniform, block_norm_squares, block_partial_leverage };

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view name);

Vector uniform_distribution(Index n);

/// p_i = ||A_i||_F^2 / ||A||_F^2. Throws DegenerateInputError for A = 0.
Vector block_norm_squares_distribution(const BlockedMatrix& a);

struct LeverageScores {
  Vector tau;
  bool is_approximate = false;
  /// Claimed overestimation factor: tau_i <= tau_hat_i <= beta_bound * tau_i.
  double beta_bound = 1.0;

  double sum() const { return tau.sum(); }
};

/// [A; Q^{1/2}], omitting the regularizer rows when Q = 0.
Matrix stack_with_regularizer(const BlockedMatrix& a, const PsdMatrix& q);

/// Block partial leverage scores: row leverage scores of [A; Q^{1/2}] summed
/// over the rows of each block. Uses a thin QR; falls back to an SVD with
/// pseudo-inverse semantics when the stack is rank-deficient.
LeverageScores exact_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q);

struct FastLeverageOptions {
  /// 0 selects sketch_factor * d.
  Index sketch_rows = 0;
  double sketch_factor = 20.0;
  double beta_safety = 2.0;
  std::uint64_t seed = 0;
};

/// Sketch [A; Q^{1/2}] with a sparse embedding, take R from the QR of the
/// sketch and return beta_safety * sum_{j in block} ||abar_j^T R^{-1}||^2.
/// A singular sketch is retried once with a fresh seed.
LeverageScores fast_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q,
                                                  const FastLeverageOptions& opts);

/// Same pipeline with a caller-supplied embedding (rows of the stack as input).
LeverageScores fast_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q,
                                                  const SparseEmbedding& embedding, double beta_safety);

/// p_i = tau_i / sum_j tau_j.
Vector leverage_distribution(const LeverageScores& scores);

/// 4 sum_tau log(4d / delta) / eps^2, before rounding up.
double sampling_size_leverage_raw(double sum_tau, Index d, double eps, double delta);
Index sampling_size_leverage(double sum_tau, Index d, double eps, double delta);

/// 4 sr log(min(4 sr, d) / delta) / eps^2, before rounding up.
double sampling_size_block_norms_raw(double stable_rank, Index d, double eps, double delta);
Index sampling_size_block_norms(double stable_rank, Index d, double eps, double delta);

/// 4 n (max_i ||A_i||_2^2 / ||A||_2^2) log(d / delta) / eps^2, before rounding up.
double sampling_size_uniform_raw(const BlockedMatrix& a, Index d, double eps, double delta);
Index sampling_size_uniform(const BlockedMatrix& a, Index d, double eps, double delta);

/// ||A||_F^2 / ||A||_2^2. Throws DegenerateInputError for A = 0.
double stable_rank(const BlockedMatrix& a);

struct SamplingPlan {
  Scheme scheme = Scheme::uniform;
  Vector p;
  Vector q;
  double budget = 0.0;
  std::uint64_t seed = 0;

  /// Validates p (non-negative, sums to 1 within 1e-12) and sets q_i = min(s p_i, 1).
  static SamplingPlan make(Scheme scheme, Vector p, double budget, std::uint64_t seed);

  Index block_count() const noexcept { return p.size(); }
  double expected_kept() const { return q.sum(); }
};

/// Retained blocks with their inclusion probabilities; scale = 1/sqrt(q).
struct BlockSample {
  std::vector<std::size_t> kept;
  std::vector<double> inclusion;
  std::vector<double> scale;

  std::size_t size() const noexcept { return kept.size(); }
  bool empty() const noexcept { return kept.empty(); }
  /// Per-kept-block weights 1/q_i of A_i^T A_i in the sampled Hessian.
  std::vector<double> weights() const;

  /// Every block kept with q = 1.
  static BlockSample all(Index n);
};

/// Keeps block i independently with probability q_i, using plan.seed.
/// Throws EmptySampleError when nothing is kept.
BlockSample draw_block_sample(const SamplingPlan& plan);
BlockSample draw_block_sample(const SamplingPlan& plan, std::uint64_t seed);

/// Retries with derived seeds after an empty draw, at most max_attempts draws in total.
BlockSample draw_block_sample_retrying(const SamplingPlan& plan, int max_attempts = 10);

}  // namespace ssn
