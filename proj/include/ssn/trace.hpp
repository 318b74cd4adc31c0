#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssn/linalg.hpp"

namespace ssn {

/// One row of a run trace. Record t describes the iterate w_t; the solver
/// and sampling columns describe the step that produced it (zero for t = 0).
struct IterationRecord {
  int iter = 0;
  double wall_time = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::optional<double> rel_error;  // ||w_t - w*|| / ||w*||
  std::optional<double> abs_error;  // ||w_t - w*||
  Index kept_blocks = 0;
  int solver_iters = 0;
  double solver_residual = 0.0;
  // Instrumented runs only: measured approximation quality of the step's
  // sampled Hessian and the true relative error of the subproblem solution.
  std::optional<double> eps_c1;
  std::optional<double> eps_c2;
  std::optional<double> eps0;
};

enum class RunStatus { running, converged, max_iters, diverged, solver_failure, bad_step };

std::string_view to_string(RunStatus s) noexcept;

struct RunTrace {
  std::string method;
  std::vector<IterationRecord> records;
  /// Filled only when iterates were requested.
  std::vector<Vector> iterates;
  RunStatus status = RunStatus::running;
  std::string message;
};

struct RunResult {
  Vector w;
  RunTrace trace;
};

/// Header: iter,time_s,objective,grad_norm,rel_err,kept_blocks,solver_iters,solver_residual
void write_trace_csv(std::ostream& out, const RunTrace& trace);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

/// Shared per-run knobs for every optimizer.
struct RunOptions {
  /// Reference minimizer; enables rel_error / abs_error columns.
  std::optional<Vector> reference;
  bool keep_iterates = false;
  /// Second-order methods only: record eps_c1, eps_c2 and eps0 per step.
  /// Measurement time is excluded from wall_time.
  bool instrument = false;
};

/// Builds a RunTrace while a run progresses; owns the wall clock.
class TraceRecorder {
 public:
  TraceRecorder(std::string method, const RunOptions& opts);

  IterationRecord& record(int iter, const Vector& w, double objective, double grad_norm);

  /// Excludes the enclosed work from wall_time.
  class Pause {
   public:
    explicit Pause(TraceRecorder& r) : r_(r), start_(std::chrono::steady_clock::now()) {}
    ~Pause() { r_.excluded_ += std::chrono::steady_clock::now() - start_; }
    Pause(const Pause&) = delete;
    Pause& operator=(const Pause&) = delete;

   private:
    TraceRecorder& r_;
    std::chrono::steady_clock::time_point start_;
  };

  /// True once the tracked error (rel_error with a reference, grad_norm
  /// otherwise) has exceeded 10x its initial value for 5 consecutive records.
  bool diverging() const noexcept { return over_count_ >= 5; }

  RunTrace finish(RunStatus status, std::string message = {});

  const RunTrace& trace() const noexcept { return trace_; }

 private:
  RunTrace trace_;
  const RunOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::duration excluded_{};
  double initial_metric_ = -1.0;
  int over_count_ = 0;
};

}  // namespace ssn
