// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "ssn/kernels.hpp"

namespace ssn::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

// Four rows per pass over the upper triangle, so each H entry is loaded and
// stored once per four rank-one updates.
void gram_upper_avx2(const double* rows, std::size_t stride, const std::size_t* index,
                     const double* weights, std::size_t count, std::size_t d, double* h) {
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    const double* a0 = rows + (index ? index[j] : j) * stride;
    const double* a1 = rows + (index ? index[j + 1] : j + 1) * stride;
    const double* a2 = rows + (index ? index[j + 2] : j + 2) * stride;
    const double* a3 = rows + (index ? index[j + 3] : j + 3) * stride;
    const double w0 = weights ? weights[j] : 1.0;
    const double w1 = weights ? weights[j + 1] : 1.0;
    const double w2 = weights ? weights[j + 2] : 1.0;
    const double w3 = weights ? weights[j + 3] : 1.0;
    for (std::size_t r = 0; r < d; ++r) {
      const double s0 = w0 * a0[r], s1 = w1 * a1[r], s2 = w2 * a2[r], s3 = w3 * a3[r];
      const __m256d v0 = _mm256_set1_pd(s0), v1 = _mm256_set1_pd(s1);
      const __m256d v2 = _mm256_set1_pd(s2), v3 = _mm256_set1_pd(s3);
      double* hr = h + r * d;
      std::size_t c = r;
      for (; c + 4 <= d; c += 4) {
        __m256d acc = _mm256_mul_pd(v0, _mm256_loadu_pd(a0 + c));
        acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(a1 + c), acc);
        acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(a2 + c), acc);
        acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(a3 + c), acc);
        _mm256_storeu_pd(hr + c, _mm256_add_pd(_mm256_loadu_pd(hr + c), acc));
      }
      for (; c < d; ++c) hr[c] += s0 * a0[c] + s1 * a1[c] + s2 * a2[c] + s3 * a3[c];
    }
  }
  for (; j < count; ++j) {
    const double* a = rows + (index ? index[j] : j) * stride;
    const double w = weights ? weights[j] : 1.0;
    for (std::size_t r = 0; r < d; ++r) axpy_avx2(w * a[r], a + r, h + r * d + r, d - r);
  }
}

void gram_apply_avx2(const double* rows, std::size_t stride, const std::size_t* index,
                     const double* weights, std::size_t count, std::size_t d, const double* v,
                     double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    const double* a = rows + (index ? index[j] : j) * stride;
    const double w = weights ? weights[j] : 1.0;
    axpy_avx2(w * dot_avx2(a, v, d), a, out, d);
  }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2,       dot_avx2,        axpy_avx2,
                             sum_squares_avx2, gram_upper_avx2, gram_apply_avx2};
}  // namespace detail

}  // namespace ssn::kernels
