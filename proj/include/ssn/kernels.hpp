#pragma once

// Row-loop kernels used by the GLM evaluations, Hessian assembly and
// sub-sampled Hessian operator. Every kernel has a portable scalar reference
// and, on x86-64, an AVX2/FMA variant chosen at runtime from CPUID.

#include <cstddef>
#include <span>
#include <string_view>

namespace ssn::kernels {

enum class Isa { scalar, avx2 };

/// Function table for one instruction set. All matrices are row-major.
///
/// `gram_upper` accumulates H += sum_j w_j a_j a_j^T into the upper triangle
/// (c >= r) of the d x d matrix `h`, where a_j is row `index[j]` of `rows`
/// (row stride `stride`). `index == nullptr` means rows 0..count-1 and
/// `weights == nullptr` means unit weights.
///
/// `gram_apply` accumulates out += sum_j w_j (a_j . v) a_j with the same
/// row-selection conventions.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  void (*gram_upper)(const double* rows, std::size_t stride, const std::size_t* index,
                     const double* weights, std::size_t count, std::size_t d, double* h);
  void (*gram_apply)(const double* rows, std::size_t stride, const std::size_t* index,
                     const double* weights, std::size_t count, std::size_t d, const double* v,
                     double* out);
};

bool isa_supported(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Table for a specific ISA; throws ssn::ConfigError when the CPU lacks it.
const KernelTable& table(Isa isa);

/// Table used by the library. Defaults to the widest supported ISA; the
/// environment variable SSN_KERNELS=scalar forces the reference path.
const KernelTable& active() noexcept;
Isa active_isa() noexcept;

/// Switch the library-wide table. Intended for tests and benchmarks.
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(SSN_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace ssn::kernels
