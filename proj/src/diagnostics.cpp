#include "ssn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ssn/errors.hpp"

namespace ssn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio_or_inf(double num, double den) { return den > 0.0 ? num / den : kInf; }

std::vector<std::size_t> expand_rows(const BlockedMatrix& a, const BlockSample& sample, std::vector<double>& weights) {
  const auto k = static_cast<std::size_t>(a.block_rows());
  std::vector<std::size_t> rows;
  rows.reserve(sample.size() * k);
  weights.clear();
  weights.reserve(sample.size() * k);
  for (std::size_t j = 0; j < sample.size(); ++j) {
    for (std::size_t r = 0; r < k; ++r) {
      rows.push_back(sample.kept[j] * k + r);
      weights.push_back(1.0 / sample.inclusion[j]);
    }
  }
  return rows;
}

}  // namespace

double measure_c1(const Matrix& h_exact, const Matrix& h_tilde) {
  if (h_exact.rows() != h_tilde.rows() || h_exact.cols() != h_tilde.cols()) {
    throw DimensionError("measure_c1 dimension mismatch");
  }
  const double denom = symmetric_spectral_norm(h_exact);
  if (!(denom > 0.0)) throw DegenerateInputError("measure_c1 with a zero Hessian");
  const Matrix diff = h_tilde - h_exact;
  return symmetric_spectral_norm(0.5 * (diff + diff.transpose())) / denom;
}

Matrix sampled_hessian(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample) {
  std::vector<double> weights;
  const auto rows = expand_rows(a, sample, weights);
  Matrix h = Matrix::Zero(a.cols(), a.cols());
  accumulate_gram_upper(a.entries(), rows, weights, h);
  mirror_upper(h);
  q.add_to(h);
  return h;
}

C2Meter::C2Meter(const BlockedMatrix& a, const PsdMatrix& q) : a_(a), q_(q) {
  const Matrix stacked = stack_with_regularizer(a, q);
  try {
    r_ = qr_r_factor(stacked);
  } catch (const Error&) {
    throw Error("[A; Q^{1/2}] is rank-deficient; the two-sided condition needs lambda > 0 or full-rank data");
  }
  h_ = Matrix::Zero(a.cols(), a.cols());
  accumulate_gram_upper(a.entries(), {}, {}, h_);
  mirror_upper(h_);
  q.add_to(h_);
}

double C2Meter::measure_tilde(const Matrix& h_tilde) const {
  const Matrix diff = h_tilde - h_;
  // W = R^{-T} diff R^{-1}
  const Matrix right = r_.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(diff);
  const Matrix w = r_.transpose().triangularView<Eigen::Lower>().solve(right);
  return symmetric_spectral_norm(0.5 * (w + w.transpose()));
}

double C2Meter::measure(const BlockSample& sample) const { return measure_tilde(sampled_hessian(a_, q_, sample)); }

double C2Meter::measure_c1(const BlockSample& sample) const {
  return ssn::measure_c1(h_, sampled_hessian(a_, q_, sample));
}

double measure_c2(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample) {
  return C2Meter(a, q).measure(sample);
}

ConditionReport condition_report(const BlockedMatrix& a, const PsdMatrix& q, const BlockSample& sample,
                                 double threshold) {
  const C2Meter meter(a, q);
  ConditionReport rep;
  const Matrix h_tilde = sampled_hessian(a, q, sample);
  rep.eps_c1 = ssn::measure_c1(meter.hessian(), h_tilde);
  rep.eps_c2 = meter.measure_tilde(h_tilde);
  rep.threshold = threshold;
  rep.holds_c1 = rep.eps_c1 <= threshold;
  rep.holds_c2 = rep.eps_c2 <= threshold;
  return rep;
}

ConditionNumbers condition_numbers(const std::vector<Matrix>& blocks, const PsdMatrix& q) {
  if (blocks.empty()) throw DimensionError("condition_numbers needs at least one block");
  const Index d = q.dim();
  Matrix sum = Matrix::Zero(d, d);
  double max_block = 0.0;
  double min_block = kInf;
  for (const Matrix& h : blocks) {
    if (h.rows() != d || h.cols() != d) throw DimensionError("block Hessian dimension mismatch");
    sum += h;
    const EigExtremes e = symmetric_eig_extremes(h);
    max_block = std::max(max_block, e.max);
    min_block = std::min(min_block, e.min);
  }
  const EigExtremes raw = symmetric_eig_extremes(sum);
  Matrix full = sum;
  q.add_to(full);
  const EigExtremes reg = symmetric_eig_extremes(full);
  ConditionNumbers c;
  c.lambda_min = reg.min;
  c.lambda_max = reg.max;
  c.kappa = ratio_or_inf(reg.max, reg.min);
  c.kappa_raw = ratio_or_inf(raw.max, raw.min);
  c.kappa_hat = ratio_or_inf(static_cast<double>(blocks.size()) * max_block, raw.min);
  c.kappa_bar = ratio_or_inf(max_block, min_block);
  return c;
}

ConditionNumbers condition_numbers(const BlockedMatrix& a, const PsdMatrix& q) {
  const Index d = a.cols();
  if (q.dim() != d) throw DimensionError("regularizer dimension does not match A");
  Matrix sum = Matrix::Zero(d, d);
  accumulate_gram_upper(a.entries(), {}, {}, sum);
  mirror_upper(sum);
  double max_block = 0.0;
  double min_block = kInf;
  if (a.block_rows() == 1) {
    // Rank-one blocks: lambda_max = ||a_i||^2, lambda_min = 0 unless d = 1.
    const Vector norms = a.block_frobenius_squared();
    max_block = norms.maxCoeff();
    min_block = d == 1 ? norms.minCoeff() : 0.0;
  } else {
    for (Index i = 0; i < a.block_count(); ++i) {
      const Matrix blk = a.block(i);
      const EigExtremes e = symmetric_eig_extremes(blk.transpose() * blk);
      max_block = std::max(max_block, e.max);
      min_block = std::min(min_block, std::max(e.min, 0.0));
    }
  }
  const EigExtremes raw = symmetric_eig_extremes(sum);
  Matrix full = sum;
  q.add_to(full);
  const EigExtremes reg = symmetric_eig_extremes(full);
  ConditionNumbers c;
  c.lambda_min = reg.min;
  c.lambda_max = reg.max;
  c.kappa = ratio_or_inf(reg.max, reg.min);
  c.kappa_raw = ratio_or_inf(raw.max, raw.min);
  c.kappa_hat = ratio_or_inf(static_cast<double>(a.block_count()) * max_block, raw.min);
  c.kappa_bar = ratio_or_inf(max_block, min_block);
  return c;
}

RecursionReport verify_recursion(const RunTrace& trace, const Vector& w_star, const RecursionModel& model) {
  const auto& recs = trace.records;
  std::vector<double> errors(recs.size());
  for (std::size_t t = 0; t < recs.size(); ++t) {
    if (trace.iterates.size() == recs.size()) {
      errors[t] = (trace.iterates[t] - w_star).norm();
    } else if (recs[t].abs_error) {
      errors[t] = *recs[t].abs_error;
    } else {
      throw Error("verify_recursion needs stored iterates or abs_error records");
    }
  }
  RecursionReport rep;
  rep.region_radius = model.lipschitz > 0.0 ? model.mu / (4.0 * model.lipschitz) : kInf;
  for (std::size_t t = 0; t + 1 < recs.size(); ++t) {
    const IterationRecord& next = recs[t + 1];
    double eps = model.eps;
    double eps0 = model.eps0;
    if (model.use_trace_measurements) {
      const auto& measured = model.regime == ApproxRegime::c2 ? next.eps_c2 : next.eps_c1;
      if (measured) eps = *measured;
      if (next.eps0) eps0 = *next.eps0;
    }
    RecursionStep step;
    step.iter = recs[t].iter;
    step.error = errors[t];
    step.next_error = errors[t + 1];
    step.in_region = step.error <= rep.region_radius;
    ConvergenceConstants c;
    try {
      c = convergence_constants(eps, model.kappa, model.lipschitz, model.mu, model.regime);
    } catch (const ConfigError&) {
      ++rep.skipped_steps;
      rep.steps.push_back(step);
      continue;
    }
    step.linear_coefficient = c.inexact_c_l(eps0);
    step.bound = c.inexact_c_q(eps0) * step.error * step.error + step.linear_coefficient * step.error;
    step.satisfied = step.next_error <= step.bound * (1.0 + model.rel_slack) + model.abs_slack;
    if (step.in_region) {
      ++rep.in_region_steps;
      if (step.satisfied) ++rep.in_region_satisfied;
      if (step.linear_coefficient >= 1.0) rep.non_contraction = true;
    }
    rep.steps.push_back(step);
  }
  return rep;
}

LipschitzEstimate estimate_lipschitz_L(const GlmProblem& problem, const Vector& center, double radius, int probes,
                                       std::uint64_t seed) {
  if (probes < 2) throw ConfigError("need at least two probes");
  if (!(radius > 0.0)) throw ConfigError("probe radius must be > 0");
  if (center.size() != problem.d()) throw DimensionError("probe center has wrong dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double dim = static_cast<double>(problem.d());
  std::vector<Vector> points;
  std::vector<Matrix> hessians;
  points.reserve(static_cast<std::size_t>(probes));
  hessians.reserve(static_cast<std::size_t>(probes));
  LipschitzEstimate est;
  for (int k = 0; k < probes; ++k) {
    Vector dir(problem.d());
    for (Index c = 0; c < dir.size(); ++c) dir(c) = normal(rng);
    const double nrm = dir.norm();
    const double rad = radius * std::pow(unif(rng), 1.0 / dim);
    Vector u = center + (nrm > 0.0 ? rad / nrm : 0.0) * dir;
    Matrix hu = hessian(problem, u);
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double dist = (u - points[j]).norm();
      if (dist > 0.0) est.lower = std::max(est.lower, symmetric_spectral_norm(hu - hessians[j]) / dist);
    }
    points.push_back(std::move(u));
    hessians.push_back(std::move(hu));
  }
  est.inflated = 2.0 * est.lower;
  return est;
}

}  // namespace ssn
