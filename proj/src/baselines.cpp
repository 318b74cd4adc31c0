#include "ssn/baselines.hpp"

#include <cmath>
#include <deque>

#include "ssn/errors.hpp"

namespace ssn {

std::string_view to_string(BaselineMethod m) noexcept {
  switch (m) {
    case BaselineMethod::newton:
      return "newton";
    case BaselineMethod::lbfgs:
      return "lbfgs";
    case BaselineMethod::gd:
      return "gd";
    case BaselineMethod::agd:
      return "agd";
  }
  return "unknown";
}

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "newton") return BaselineMethod::newton;
  if (name == "lbfgs") return BaselineMethod::lbfgs;
  if (name == "gd") return BaselineMethod::gd;
  if (name == "agd") return BaselineMethod::agd;
  throw ConfigError("unknown baseline method '" + std::string(name) + "'");
}

std::string_view to_string(InnerSolver s) noexcept { return s == InnerSolver::direct ? "direct" : "cg"; }

InnerSolver parse_inner_solver(std::string_view name) {
  if (name == "direct") return InnerSolver::direct;
  if (name == "cg") return InnerSolver::cg;
  throw ConfigError("unknown inner solver '" + std::string(name) + "'");
}

void BaselineConfig::validate() const {
  if (lbfgs_history < 1) throw ConfigError("lbfgs_history must be >= 1");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must lie in (0, 1)");
  if (step_rule.eta && !(*step_rule.eta > 0.0)) throw ConfigError("step size eta must be > 0");
  if (!(step_rule.alpha > 0.0 && step_rule.alpha < 1.0)) throw ConfigError("backtracking alpha must lie in (0, 1)");
  if (!(step_rule.beta > 0.0 && step_rule.beta < 1.0)) throw ConfigError("backtracking beta must lie in (0, 1)");
  if (mu && !(*mu > 0.0)) throw ConfigError("mu must be > 0");
  if (stop_rel_error && !(*stop_rel_error > 0.0)) throw ConfigError("stop_rel_error must be > 0");
  if (stop_grad_norm && !(*stop_grad_norm >= 0.0)) throw ConfigError("stop_grad_norm must be >= 0");
}

std::string BaselineConfig::method_name() const {
  switch (method) {
    case BaselineMethod::newton:
      return "newton";
    case BaselineMethod::lbfgs:
      return "lbfgs-" + std::to_string(lbfgs_history);
    case BaselineMethod::gd:
      return "gd";
    case BaselineMethod::agd:
      return "agd";
  }
  return "baseline";
}

namespace {

/// Shared bookkeeping: stop tests and the initial record.
class Driver {
 public:
  Driver(const GlmProblem& p, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts)
      : p_(p), cfg_(cfg), rec_(cfg.method_name(), opts), w(w0) {
    cfg.validate();
    if (w0.size() != p.d()) throw DimensionError("w0 has wrong dimension");
    f = objective(p, w);
    g = gradient(p, w);
    grad_stop_ = cfg.stop_grad_norm.value_or(1e-10 * (1.0 + std::abs(f)));
    rec_.record(0, w, f, g.norm());
  }

  bool done() const {
    const IterationRecord& r = rec_.trace().records.back();
    if (r.grad_norm <= grad_stop_) return true;
    return cfg_.stop_rel_error && r.rel_error && *r.rel_error <= *cfg_.stop_rel_error;
  }

  /// Evaluates f, g at the new w and appends a record.
  IterationRecord& step(int iter) {
    f = objective(p_, w);
    g = gradient(p_, w);
    return rec_.record(iter, w, f, g.norm());
  }

  /// Status after the latest record, or running.
  RunStatus check() const {
    if (!w.allFinite() || !std::isfinite(f)) return RunStatus::diverged;
    if (done()) return RunStatus::converged;
    if (rec_.diverging()) return RunStatus::diverged;
    return RunStatus::running;
  }

  RunResult finish(RunStatus s, std::string msg = {}) {
    if (s == RunStatus::diverged && msg.empty()) msg = "error grew 10x over its initial value or became non-finite";
    return {w, rec_.finish(s, std::move(msg))};
  }

  TraceRecorder& recorder() { return rec_; }

 private:
  const GlmProblem& p_;
  const BaselineConfig& cfg_;
  TraceRecorder rec_;
  double grad_stop_ = 0.0;

 public:
  Vector w;
  double f = 0.0;
  Vector g;
};

double smoothness_estimate(const GlmProblem& p, const Vector& w0) {
  const double l = symmetric_eig_extremes(hessian(p, w0)).max;
  if (!(l > 0.0)) throw DegenerateInputError("Hessian at w0 has no positive curvature; set the step size explicitly");
  return l;
}

}  // namespace

RunResult newton_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts) {
  Driver dr(problem, w0, cfg, opts);
  if (dr.done()) return dr.finish(RunStatus::converged);
  for (int t = 0; t < cfg.max_iters; ++t) {
    const Matrix h = hessian(problem, dr.w);
    Vector v;
    int iters = 1;
    double residual = 0.0;
    try {
      if (cfg.inner_solver == InnerSolver::direct) {
        v = -cholesky_solve(h, dr.g);
      } else {
        const LinearOperator op = [&h](const Vector& x, Vector& out) { out.noalias() = h * x; };
        CgResult r = conjugate_gradient(op, -dr.g, cfg.inner_tol, static_cast<int>(10 * problem.d()));
        v = std::move(r.x);
        iters = r.iters;
        residual = r.residual;
      }
    } catch (const IndefiniteMatrixError& e) {
      throw SingularMatrixError(std::string("Newton Hessian is not positive definite: ") + e.what());
    }
    if (cfg.inner_solver == InnerSolver::direct) {
      const double gn = dr.g.norm();
      residual = gn > 0.0 ? (h * v + dr.g).norm() / gn : 0.0;
    }
    dr.w += v;
    IterationRecord& r = dr.step(t + 1);
    r.kept_blocks = problem.n();
    r.solver_iters = iters;
    r.solver_residual = residual;
    if (const RunStatus s = dr.check(); s != RunStatus::running) return dr.finish(s);
  }
  return dr.finish(RunStatus::max_iters);
}

RunResult lbfgs_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts) {
  Driver dr(problem, w0, cfg, opts);
  if (dr.done()) return dr.finish(RunStatus::converged);
  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> mem;
  const auto m = static_cast<std::size_t>(cfg.lbfgs_history);
  for (int t = 0; t < cfg.max_iters; ++t) {
    Vector dir = -dr.g;
    if (!mem.empty()) {
      std::vector<double> alpha(mem.size());
      Vector q = dr.g;
      for (std::size_t j = mem.size(); j-- > 0;) {
        alpha[j] = mem[j].rho * mem[j].s.dot(q);
        q -= alpha[j] * mem[j].y;
      }
      const Pair& last = mem.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
      for (std::size_t j = 0; j < mem.size(); ++j) {
        const double b = mem[j].rho * mem[j].y.dot(q);
        q += (alpha[j] - b) * mem[j].s;
      }
      dir = -q;
      if (!(dir.dot(dr.g) < 0.0)) {
        mem.clear();
        dir = -dr.g;
      }
    }
    // Empty memory: steepest descent, first trial step normalized to unit length.
    double step = mem.empty() ? std::min(1.0, 1.0 / dr.g.norm()) : 1.0;
    const double slope = dr.g.dot(dir);
    const double f_old = dr.f;
    Vector w_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      w_new = dr.w + step * dir;
      f_new = objective(problem, w_new);
      if (f_new <= f_old + cfg.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return dr.finish(RunStatus::bad_step, "line search failed to find sufficient decrease");
    const Vector g_old = dr.g;
    const Vector w_old = dr.w;
    dr.w = w_new;
    dr.step(t + 1);
    Pair pr{dr.w - w_old, dr.g - g_old, 0.0};
    const double sy = pr.s.dot(pr.y);
    if (sy > 1e-12 * pr.s.norm() * pr.y.norm()) {
      pr.rho = 1.0 / sy;
      mem.push_back(std::move(pr));
      if (mem.size() > m) mem.pop_front();
    }
    if (const RunStatus s = dr.check(); s != RunStatus::running) return dr.finish(s);
  }
  return dr.finish(RunStatus::max_iters);
}

RunResult gd_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts) {
  Driver dr(problem, w0, cfg, opts);
  if (dr.done()) return dr.finish(RunStatus::converged);
  const bool fixed = cfg.step_rule.kind == StepRule::Kind::fixed;
  double eta = 0.0;
  {
    const TraceRecorder::Pause pause(dr.recorder());
    eta = cfg.step_rule.eta ? *cfg.step_rule.eta : 1.0 / smoothness_estimate(problem, w0);
  }
  int increases = 0;
  for (int t = 0; t < cfg.max_iters; ++t) {
    const double f_old = dr.f;
    if (fixed) {
      dr.w -= eta * dr.g;
    } else {
      const double gg = dr.g.squaredNorm();
      double step = eta;
      Vector w_new = dr.w - step * dr.g;
      for (int ls = 0; ls < 60 && objective(problem, w_new) > f_old - cfg.step_rule.alpha * step * gg; ++ls) {
        step *= cfg.step_rule.beta;
        w_new = dr.w - step * dr.g;
      }
      dr.w = std::move(w_new);
    }
    dr.step(t + 1);
    increases = dr.f > f_old ? increases + 1 : 0;
    if (increases >= 10) return dr.finish(RunStatus::bad_step, "objective increased for 10 consecutive steps");
    if (const RunStatus s = dr.check(); s != RunStatus::running) return dr.finish(s);
  }
  return dr.finish(RunStatus::max_iters);
}

RunResult agd_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg, const RunOptions& opts) {
  Driver dr(problem, w0, cfg, opts);
  if (dr.done()) return dr.finish(RunStatus::converged);
  double lip = 0.0;
  double mu = 0.0;
  {
    const TraceRecorder::Pause pause(dr.recorder());
    const EigExtremes e = symmetric_eig_extremes(hessian(problem, w0));
    lip = cfg.step_rule.eta ? 1.0 / *cfg.step_rule.eta : e.max;
    mu = cfg.mu ? *cfg.mu : e.min;
    if (!(lip > 0.0)) throw DegenerateInputError("Hessian at w0 has no positive curvature; set the step size explicitly");
    if (!(mu > 0.0)) throw DegenerateInputError("objective is not strongly convex at w0; set mu explicitly");
    mu = std::min(mu, lip);
  }
  const double sk = std::sqrt(lip / mu);
  const double momentum = (sk - 1.0) / (sk + 1.0);
  Vector w_prev = dr.w;
  int increases = 0;
  for (int t = 0; t < cfg.max_iters; ++t) {
    const double f_old = dr.f;
    const Vector y = dr.w + momentum * (dr.w - w_prev);
    w_prev = dr.w;
    dr.w = y - gradient(problem, y) / lip;
    dr.step(t + 1);
    increases = dr.f > f_old ? increases + 1 : 0;
    if (increases >= 10) return dr.finish(RunStatus::bad_step, "objective increased for 10 consecutive steps");
    if (const RunStatus s = dr.check(); s != RunStatus::running) return dr.finish(s);
  }
  return dr.finish(RunStatus::max_iters);
}

RunResult baseline_run(const GlmProblem& problem, const Vector& w0, const BaselineConfig& cfg,
                       const RunOptions& opts) {
  switch (cfg.method) {
    case BaselineMethod::newton:
      return newton_run(problem, w0, cfg, opts);
    case BaselineMethod::lbfgs:
      return lbfgs_run(problem, w0, cfg, opts);
    case BaselineMethod::gd:
      return gd_run(problem, w0, cfg, opts);
    case BaselineMethod::agd:
      return agd_run(problem, w0, cfg, opts);
  }
  throw ConfigError("unknown baseline method");
}

Vector reference_solution(const GlmProblem& problem, double grad_tol, int max_iters) {
  Vector w = Vector::Zero(problem.d());
  Vector g = gradient(problem, w);
  double best = g.norm();
  Vector best_w = w;
  int stalled = 0;
  for (int t = 0; t < max_iters && best > grad_tol && stalled < 3; ++t) {
    const Vector v = -cholesky_solve(hessian(problem, w), g);
    w += v;
    g = gradient(problem, w);
    const double gn = g.norm();
    if (!std::isfinite(gn)) throw Error("reference Newton run diverged");
    if (gn < best) {
      best = gn;
      best_w = w;
      stalled = 0;
    } else {
      ++stalled;
    }
  }
  return best_w;
}

}  // namespace ssn
