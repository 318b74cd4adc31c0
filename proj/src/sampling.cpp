#include "ssn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ssn/errors.hpp"
#include "ssn/kernels.hpp"
#include "ssn/rng.hpp"

namespace ssn {
namespace {

void check_eps_delta(double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
}

Index ceil_count(double raw) {
  if (!std::isfinite(raw)) throw ConfigError("sampling size is not finite");
  return static_cast<Index>(std::ceil(raw));
}

// Sum of squared entries of the first `rows` rows, grouped per block.
Vector block_sums_of_row_norms(const Matrix& u, Index block_count, Index block_rows) {
  const auto& k = kernels::active();
  Vector tau = Vector::Zero(block_count);
  const auto width = static_cast<std::size_t>(u.cols());
  for (Index i = 0; i < block_count; ++i) {
    double acc = 0.0;
    for (Index r = i * block_rows; r < (i + 1) * block_rows; ++r) acc += k.sum_squares(u.data() + r * u.cols(), width);
    tau(i) = acc;
  }
  return tau;
}

LeverageScores leverage_from_svd(const BlockedMatrix& a, const Matrix& stacked) {
  Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? sv(0) * static_cast<double>(std::max(stacked.rows(), stacked.cols())) *
                                            std::numeric_limits<double>::epsilon()
                                      : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const Matrix u = svd.matrixU().topLeftCorner(a.entries().rows(), rank);
  return {block_sums_of_row_norms(u, a.block_count(), a.block_rows()), false, 1.0};
}

}  // namespace

std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::uniform:
      return "uniform";
    case Scheme::block_norm_squares:
      return "block_norm_squares";
    case Scheme::block_partial_leverage:
      return "block_partial_leverage";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "uniform") return Scheme::uniform;
  if (name == "block_norm_squares" || name == "rnorm") return Scheme::block_norm_squares;
  if (name == "block_partial_leverage" || name == "plev") return Scheme::block_partial_leverage;
  throw ConfigError("unknown sampling scheme '" + std::string(name) + "'");
}

Vector uniform_distribution(Index n) {
  if (n < 1) throw DimensionError("need at least one block");
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

Vector block_norm_squares_distribution(const BlockedMatrix& a) {
  Vector r = a.block_frobenius_squared();
  const double total = r.sum();
  if (!(total > 0.0)) throw DegenerateInputError("block norm squares of an all-zero matrix");
  return r / total;
}

Matrix stack_with_regularizer(const BlockedMatrix& a, const PsdMatrix& q) {
  if (q.dim() != a.cols()) throw DimensionError("regularizer dimension does not match A");
  if (q.is_zero()) return a.entries();
  Matrix stacked(a.entries().rows() + q.dim(), a.cols());
  stacked.topRows(a.entries().rows()) = a.entries();
  stacked.bottomRows(q.dim()) = q.sqrt();
  return stacked;
}

LeverageScores exact_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q) {
  const Matrix stacked = stack_with_regularizer(a, q);
  const Index d = stacked.cols();
  if (stacked.rows() >= d) {
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const auto& packed = qr.matrixQR();
    const double fro = stacked.norm();
    bool full_rank = fro > 0.0;
    for (Index i = 0; i < d && full_rank; ++i) full_rank = std::abs(packed(i, i)) >= 1e-12 * fro;
    if (full_rank) {
      const Matrix thin_q = qr.householderQ() * Matrix::Identity(stacked.rows(), d);
      const Matrix u = thin_q.topRows(a.entries().rows());
      return {block_sums_of_row_norms(u, a.block_count(), a.block_rows()), false, 1.0};
    }
  }
  return leverage_from_svd(a, stacked);
}

LeverageScores fast_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q,
                                                  const SparseEmbedding& embedding, double beta_safety) {
  if (!(beta_safety >= 1.0)) throw ConfigError("beta_safety must be >= 1");
  const Matrix stacked = stack_with_regularizer(a, q);
  const Matrix sketch = embedding.apply(stacked);
  const Matrix r = qr_r_factor(sketch);
  // rows of A times R^{-1}
  const Matrix u = r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(a.entries());
  LeverageScores out{beta_safety * block_sums_of_row_norms(u, a.block_count(), a.block_rows()), true, 0.0};
  const double eps_sketch =
      std::sqrt(static_cast<double>(a.cols()) / static_cast<double>(embedding.target_rows()));
  out.beta_bound = eps_sketch < 1.0 ? beta_safety * beta_safety * (1.0 + eps_sketch) / (1.0 - eps_sketch)
                                    : std::numeric_limits<double>::infinity();
  return out;
}

LeverageScores fast_block_partial_leverage_scores(const BlockedMatrix& a, const PsdMatrix& q,
                                                  const FastLeverageOptions& opts) {
  const Index d = a.cols();
  const Index min_rows = static_cast<Index>(std::ceil(opts.sketch_factor * static_cast<double>(d)));
  const Index rows = opts.sketch_rows > 0 ? opts.sketch_rows : min_rows;
  if (rows < min_rows || rows < d) {
    throw ConfigError("sketch_rows " + std::to_string(rows) + " below the configured minimum " +
                      std::to_string(std::max(min_rows, d)));
  }
  const Index input_rows = a.entries().rows() + (q.is_zero() ? 0 : q.dim());
  try {
    return fast_block_partial_leverage_scores(a, q, SparseEmbedding(input_rows, rows, opts.seed), opts.beta_safety);
  } catch (const SingularMatrixError&) {
    return fast_block_partial_leverage_scores(a, q, SparseEmbedding(input_rows, rows, derive_seed(opts.seed, 1)),
                                              opts.beta_safety);
  }
}

Vector leverage_distribution(const LeverageScores& scores) {
  const double total = scores.sum();
  if (!(total > 0.0)) throw DegenerateInputError("leverage scores sum to zero");
  return scores.tau / total;
}

double sampling_size_leverage_raw(double sum_tau, Index d, double eps, double delta) {
  check_eps_delta(eps, delta);
  if (!(sum_tau > 0.0)) throw ConfigError("sum of leverage scores must be > 0");
  if (d < 1) throw ConfigError("d must be >= 1");
  return 4.0 * sum_tau * std::log(4.0 * static_cast<double>(d) / delta) / (eps * eps);
}

Index sampling_size_leverage(double sum_tau, Index d, double eps, double delta) {
  return ceil_count(sampling_size_leverage_raw(sum_tau, d, eps, delta));
}

double sampling_size_block_norms_raw(double sr, Index d, double eps, double delta) {
  check_eps_delta(eps, delta);
  if (!(sr >= 1.0 - 1e-9)) throw ConfigError("stable rank must be >= 1");
  if (d < 1) throw ConfigError("d must be >= 1");
  const double inner = std::min(4.0 * sr, static_cast<double>(d));
  return 4.0 * sr * std::log(inner / delta) / (eps * eps);
}

Index sampling_size_block_norms(double sr, Index d, double eps, double delta) {
  return ceil_count(sampling_size_block_norms_raw(sr, d, eps, delta));
}

double sampling_size_uniform_raw(const BlockedMatrix& a, Index d, double eps, double delta) {
  check_eps_delta(eps, delta);
  if (d < 1) throw ConfigError("d must be >= 1");
  const double total = spectral_norm(a.entries());
  if (!(total > 0.0)) throw DegenerateInputError("uniform bound on an all-zero matrix");
  double max_block = 0.0;
  if (a.block_rows() == 1) {
    max_block = a.block_frobenius_squared().maxCoeff();
  } else {
    for (Index i = 0; i < a.block_count(); ++i) {
      const double s = spectral_norm(Matrix(a.block(i)));
      max_block = std::max(max_block, s * s);
    }
  }
  const double n = static_cast<double>(a.block_count());
  return 4.0 * n * (max_block / (total * total)) * std::log(static_cast<double>(d) / delta) / (eps * eps);
}

Index sampling_size_uniform(const BlockedMatrix& a, Index d, double eps, double delta) {
  return ceil_count(sampling_size_uniform_raw(a, d, eps, delta));
}

double stable_rank(const BlockedMatrix& a) {
  const double fro2 = a.entries().squaredNorm();
  if (!(fro2 > 0.0)) throw DegenerateInputError("stable rank of an all-zero matrix");
  const double s = spectral_norm(a.entries());
  return fro2 / (s * s);
}

SamplingPlan SamplingPlan::make(Scheme scheme, Vector p, double budget, std::uint64_t seed) {
  if (p.size() < 1) throw DimensionError("sampling plan needs at least one block");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("sampling budget must be positive");
  if ((p.array() < 0.0).any() || !p.allFinite()) throw ConfigError("probabilities must be finite and >= 0");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw ConfigError("probabilities must sum to 1");
  SamplingPlan plan;
  plan.scheme = scheme;
  plan.q = (budget * p.array()).min(1.0).matrix();
  plan.p = std::move(p);
  plan.budget = budget;
  plan.seed = seed;
  return plan;
}

std::vector<double> BlockSample::weights() const {
  std::vector<double> w(inclusion.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = 1.0 / inclusion[j];
  return w;
}

BlockSample BlockSample::all(Index n) {
  BlockSample s;
  s.kept.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < s.kept.size(); ++i) s.kept[i] = i;
  s.inclusion.assign(s.kept.size(), 1.0);
  s.scale.assign(s.kept.size(), 1.0);
  return s;
}

BlockSample draw_block_sample(const SamplingPlan& plan, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BlockSample s;
  for (Index i = 0; i < plan.q.size(); ++i) {
    const double u = unit_interval(rng());
    const double qi = plan.q(i);
    if (u < qi) {
      s.kept.push_back(static_cast<std::size_t>(i));
      s.inclusion.push_back(qi);
      s.scale.push_back(1.0 / std::sqrt(qi));
    }
  }
  if (s.empty()) throw EmptySampleError("no block kept; sampling budget too small");
  return s;
}

BlockSample draw_block_sample(const SamplingPlan& plan) { return draw_block_sample(plan, plan.seed); }

BlockSample draw_block_sample_retrying(const SamplingPlan& plan, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    try {
      return draw_block_sample(plan, attempt == 0 ? plan.seed : derive_seed(plan.seed, static_cast<std::uint64_t>(attempt)));
    } catch (const EmptySampleError&) {
    }
  }
  throw EmptySampleError("no block kept after " + std::to_string(max_attempts) +
                         " attempts; configuration invalid (budget too small)");
}

}  // namespace ssn
