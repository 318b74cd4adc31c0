#include "ssn/kernels.hpp"

namespace ssn::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void gram_upper_scalar(const double* rows, std::size_t stride, const std::size_t* index,
                       const double* weights, std::size_t count, std::size_t d, double* h) {
  for (std::size_t j = 0; j < count; ++j) {
    const double* a = rows + (index ? index[j] : j) * stride;
    const double w = weights ? weights[j] : 1.0;
    for (std::size_t r = 0; r < d; ++r) {
      const double s = w * a[r];
      double* hr = h + r * d;
      for (std::size_t c = r; c < d; ++c) hr[c] += s * a[c];
    }
  }
}

void gram_apply_scalar(const double* rows, std::size_t stride, const std::size_t* index,
                       const double* weights, std::size_t count, std::size_t d, const double* v,
                       double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    const double* a = rows + (index ? index[j] : j) * stride;
    const double w = weights ? weights[j] : 1.0;
    const double s = w * dot_scalar(a, v, d);
    axpy_scalar(s, a, out, d);
  }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar,       dot_scalar,        axpy_scalar,
                               sum_squares_scalar, gram_upper_scalar, gram_apply_scalar};
}  // namespace detail

}  // namespace ssn::kernels
