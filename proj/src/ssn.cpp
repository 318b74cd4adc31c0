#include "ssn/ssn.hpp"

#include <cmath>
#include <string>

#include "ssn/diagnostics.hpp"
#include "ssn/errors.hpp"
#include "ssn/kernels.hpp"
#include "ssn/rng.hpp"

namespace ssn {

SubsampledHessian::SubsampledHessian(const BlockedMatrix& a, BlockSample sample, PsdMatrix q)
    : a_(a), sample_(std::move(sample)), q_(std::move(q)) {
  if (q_.dim() != a_.cols()) throw DimensionError("regularizer dimension does not match A");
  if (sample_.empty()) throw EmptySampleError("sub-sampled Hessian needs at least one block");
  const auto k = static_cast<std::size_t>(a_.block_rows());
  rows_.reserve(sample_.size() * k);
  weights_.reserve(sample_.size() * k);
  for (std::size_t j = 0; j < sample_.size(); ++j) {
    if (sample_.kept[j] >= static_cast<std::size_t>(a_.block_count())) throw DimensionError("kept block out of range");
    const double w = 1.0 / sample_.inclusion[j];
    for (std::size_t r = 0; r < k; ++r) {
      rows_.push_back(sample_.kept[j] * k + r);
      weights_.push_back(w);
    }
  }
}

Matrix SubsampledHessian::materialize() const {
  Matrix h = Matrix::Zero(dim(), dim());
  accumulate_gram_upper(a_.entries(), rows_, weights_, h);
  mirror_upper(h);
  q_.add_to(h);
  return h;
}

void SubsampledHessian::apply(const Vector& v, Vector& out) const {
  if (v.size() != dim()) throw DimensionError("operator input has wrong dimension");
  out.setZero(dim());
  const auto d = static_cast<std::size_t>(dim());
  kernels::active().gram_apply(a_.entries().data(), d, rows_.data(), weights_.data(), rows_.size(), d, v.data(),
                               out.data());
  q_.apply_add(v, out);
}

LinearOperator SubsampledHessian::as_operator() const {
  return [this](const Vector& v, Vector& out) { apply(v, out); };
}

std::string_view to_string(SolverKind s) noexcept {
  switch (s) {
    case SolverKind::automatic:
      return "auto";
    case SolverKind::direct:
      return "direct";
    case SolverKind::cg:
      return "cg";
    case SolverKind::gd:
      return "gd";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "auto" || name == "automatic") return SolverKind::automatic;
  if (name == "direct") return SolverKind::direct;
  if (name == "cg") return SolverKind::cg;
  if (name == "gd") return SolverKind::gd;
  throw ConfigError("unknown solver '" + std::string(name) + "'");
}

namespace {

double relative_residual(const SubsampledHessian& h, const Vector& v, const Vector& g) {
  const double gn = g.norm();
  if (gn == 0.0) return 0.0;
  Vector hv;
  h.apply(v, hv);
  return (hv + g).norm() / gn;
}

}  // namespace

SubproblemSolution solve_subproblem(const SubsampledHessian& h, const Vector& g, SolverKind solver, double tol,
                                    int max_iters) {
  if (g.size() != h.dim()) throw DimensionError("gradient has wrong dimension");
  if (solver == SolverKind::automatic) {
    solver = h.kept_rows() > static_cast<std::size_t>(h.dim()) ? SolverKind::cg : SolverKind::direct;
  }
  SubproblemSolution out;
  out.stats.used = solver;
  switch (solver) {
    case SolverKind::direct: {
      out.v = -cholesky_solve(h.materialize(), g);
      out.stats.iters = 1;
      out.stats.residual = relative_residual(h, out.v, g);
      break;
    }
    case SolverKind::cg: {
      if (!(tol > 0.0)) throw ConfigError("cg tolerance must be > 0");
      const int cap = max_iters > 0 ? max_iters : static_cast<int>(10 * h.dim());
      CgResult r = conjugate_gradient(h.as_operator(), -g, tol, cap);
      out.v = std::move(r.x);
      out.stats.iters = r.iters;
      out.stats.residual = r.residual;
      break;
    }
    case SolverKind::gd: {
      const int cap = max_iters > 0 ? max_iters : 1000;
      const EigExtremes e = symmetric_eig_extremes(h.materialize());
      if (!(e.max > 0.0)) throw IndefiniteMatrixError("sub-sampled Hessian has no positive curvature");
      const double step = 1.0 / e.max;
      out.v = Vector::Zero(h.dim());
      Vector hv;
      for (int it = 0; it < cap; ++it) {
        h.apply(out.v, hv);
        out.v -= step * (hv + g);
      }
      out.stats.iters = cap;
      out.stats.residual = relative_residual(h, out.v, g);
      break;
    }
    case SolverKind::automatic:
      break;
  }
  return out;
}

std::string_view to_string(LeverageMode m) noexcept { return m == LeverageMode::exact ? "exact" : "fast"; }

LeverageMode parse_leverage_mode(std::string_view name) {
  if (name == "exact") return LeverageMode::exact;
  if (name == "fast") return LeverageMode::fast;
  throw ConfigError("unknown leverage mode '" + std::string(name) + "'");
}

void SsnConfig::validate() const {
  if (budget_s && !(*budget_s >= 1.0 && std::isfinite(*budget_s))) throw ConfigError("budget_s must be >= 1");
  if (!budget_s) {
    if (!(auto_eps > 0.0 && auto_eps < 1.0)) throw ConfigError("auto_eps must lie in (0, 1)");
    if (!(auto_delta > 0.0 && auto_delta < 1.0)) throw ConfigError("auto_delta must lie in (0, 1)");
  }
  if (leverage_recompute_period < 1) throw ConfigError("leverage_recompute_period must be >= 1");
  if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be > 0");
  if (max_solver_iters < 0) throw ConfigError("max_solver_iters must be >= 0");
  if (max_outer_iters < 0) throw ConfigError("max_outer_iters must be >= 0");
  if (stop_rel_error && !(*stop_rel_error > 0.0)) throw ConfigError("stop_rel_error must be > 0");
  if (stop_grad_norm && !(*stop_grad_norm >= 0.0)) throw ConfigError("stop_grad_norm must be >= 0");
  if (fast_leverage.beta_safety < 1.0) throw ConfigError("beta_safety must be >= 1");
}

std::string SsnConfig::method_name() const {
  switch (scheme) {
    case Scheme::uniform:
      return "ssn-uniform";
    case Scheme::block_norm_squares:
      return "ssn-rnorm";
    case Scheme::block_partial_leverage:
      return "ssn-plev";
  }
  return "ssn";
}

namespace {

struct PlanInputs {
  Vector p;
  double budget = 0.0;
};

PlanInputs leverage_plan(const LeverageScores& scores, Index d, const SsnConfig& cfg) {
  PlanInputs in;
  in.p = leverage_distribution(scores);
  in.budget = cfg.budget_s ? *cfg.budget_s
                           : static_cast<double>(sampling_size_leverage(scores.sum(), d, cfg.auto_eps, cfg.auto_delta));
  return in;
}

}  // namespace

RunResult ssn_run(const GlmProblem& problem, const Vector& w0, const SsnConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (w0.size() != problem.d()) throw DimensionError("w0 has wrong dimension");
  TraceRecorder rec(cfg.method_name(), opts);
  Vector w = w0;
  Vector g = gradient(problem, w);
  const double f0 = objective(problem, w);
  rec.record(0, w, f0, g.norm());
  const double grad_stop = cfg.stop_grad_norm.value_or(1e-10 * (1.0 + std::abs(f0)));
  const Index d = problem.d();

  auto done = [&](const IterationRecord& r) {
    if (r.grad_norm <= grad_stop) return true;
    return cfg.stop_rel_error && r.rel_error && *r.rel_error <= *cfg.stop_rel_error;
  };
  if (done(rec.trace().records.back())) return {w, rec.finish(RunStatus::converged)};

  std::optional<PlanInputs> cached_leverage;
  for (int t = 0; t < cfg.max_outer_iters; ++t) {
    const HessianFactorization fac = hessian_factorization(problem, w);
    PlanInputs plan_in;
    switch (cfg.scheme) {
      case Scheme::uniform:
        plan_in.p = uniform_distribution(fac.a.block_count());
        plan_in.budget = cfg.budget_s ? *cfg.budget_s
                                      : static_cast<double>(sampling_size_uniform(fac.a, d, cfg.auto_eps, cfg.auto_delta));
        break;
      case Scheme::block_norm_squares:
        plan_in.p = block_norm_squares_distribution(fac.a);
        plan_in.budget = cfg.budget_s ? *cfg.budget_s
                                      : static_cast<double>(sampling_size_block_norms(stable_rank(fac.a), d,
                                                                                      cfg.auto_eps, cfg.auto_delta));
        break;
      case Scheme::block_partial_leverage:
        if (!cached_leverage || t % cfg.leverage_recompute_period == 0) {
          LeverageScores scores;
          if (cfg.leverage_mode == LeverageMode::exact) {
            scores = exact_block_partial_leverage_scores(fac.a, fac.q);
          } else {
            FastLeverageOptions fo = cfg.fast_leverage;
            fo.seed = derive_seed(cfg.fast_leverage.seed ^ cfg.seed, 0x1000u + static_cast<std::uint64_t>(t));
            scores = fast_block_partial_leverage_scores(fac.a, fac.q, fo);
          }
          cached_leverage = leverage_plan(scores, d, cfg);
        }
        plan_in = *cached_leverage;
        break;
    }
    const SamplingPlan plan =
        SamplingPlan::make(cfg.scheme, std::move(plan_in.p), plan_in.budget, derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    const SubsampledHessian h(fac.a, draw_block_sample_retrying(plan), fac.q);

    SubproblemSolution sol;
    try {
      sol = solve_subproblem(h, g, cfg.solver, cfg.solver_tol, cfg.max_solver_iters);
    } catch (const IndefiniteMatrixError& e) {
      return {w, rec.finish(RunStatus::solver_failure, std::string("subproblem solver: ") + e.what())};
    }

    std::optional<double> eps_c1, eps_c2, eps0;
    if (opts.instrument) {
      const TraceRecorder::Pause pause(rec);
      const Matrix h_tilde = h.materialize();
      try {
        const C2Meter meter(fac.a, fac.q);
        eps_c1 = measure_c1(meter.hessian(), h_tilde);
        eps_c2 = meter.measure_tilde(h_tilde);
      } catch (const Error&) {
        eps_c1 = measure_c1(fac.hessian(), h_tilde);
      }
      try {
        const Vector v_exact = -cholesky_solve(h_tilde, g);
        const double vn = v_exact.norm();
        eps0 = vn > 0.0 ? (sol.v - v_exact).norm() / vn : 0.0;
      } catch (const Error&) {
      }
    }

    w += sol.v;
    g = gradient(problem, w);
    IterationRecord& r = rec.record(t + 1, w, objective(problem, w), g.norm());
    r.kept_blocks = static_cast<Index>(h.sample().size());
    r.solver_iters = sol.stats.iters;
    r.solver_residual = sol.stats.residual;
    r.eps_c1 = eps_c1;
    r.eps_c2 = eps_c2;
    r.eps0 = eps0;
    if (!w.allFinite()) return {w, rec.finish(RunStatus::diverged, "iterate became non-finite")};
    if (done(r)) return {w, rec.finish(RunStatus::converged)};
    if (rec.diverging()) {
      return {w, rec.finish(RunStatus::diverged, "error exceeded 10x its initial value for 5 consecutive iterations")};
    }
  }
  return {w, rec.finish(RunStatus::max_iters)};
}

}  // namespace ssn
