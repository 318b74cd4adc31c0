#include "ssn/trace.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace ssn {

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::running:
      return "running";
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iters:
      return "max_iters";
    case RunStatus::diverged:
      return "diverged";
    case RunStatus::solver_failure:
      return "solver_failure";
    case RunStatus::bad_step:
      return "bad_step";
  }
  return "unknown";
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "iter,time_s,objective,grad_norm,rel_err,kept_blocks,solver_iters,solver_residual\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_number(r.wall_time) << ',' << format_number(r.objective) << ','
        << format_number(r.grad_norm) << ',' << (r.rel_error ? format_number(*r.rel_error) : std::string()) << ','
        << r.kept_blocks << ',' << r.solver_iters << ',' << format_number(r.solver_residual) << '\n';
  }
}

TraceRecorder::TraceRecorder(std::string method, const RunOptions& opts)
    : opts_(opts), start_(std::chrono::steady_clock::now()) {
  trace_.method = std::move(method);
}

IterationRecord& TraceRecorder::record(int iter, const Vector& w, double objective, double grad_norm) {
  IterationRecord rec;
  rec.iter = iter;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_ - excluded_).count();
  if (!trace_.records.empty() && rec.wall_time < trace_.records.back().wall_time) {
    rec.wall_time = trace_.records.back().wall_time;
  }
  rec.objective = objective;
  rec.grad_norm = grad_norm;
  double metric = grad_norm;
  if (opts_.reference) {
    const double err = (w - *opts_.reference).norm();
    const double ref = opts_.reference->norm();
    rec.abs_error = err;
    rec.rel_error = ref > 0.0 ? err / ref : err;
    metric = *rec.rel_error;
  }
  if (initial_metric_ < 0.0) {
    initial_metric_ = metric;
  } else {
    over_count_ = (!std::isfinite(metric) || metric > 10.0 * initial_metric_) ? over_count_ + 1 : 0;
  }
  if (opts_.keep_iterates) trace_.iterates.push_back(w);
  trace_.records.push_back(rec);
  return trace_.records.back();
}

RunTrace TraceRecorder::finish(RunStatus status, std::string message) {
  trace_.status = status;
  trace_.message = std::move(message);
  return std::move(trace_);
}

}  // namespace ssn
