#pragma once

#include <cstdint>
#include <string_view>

#include "ssn/dataset.hpp"

namespace ssn {

/// Row-norm profile of a synthetic design.
///   incoherent     i.i.d. Gaussian rows
///   one_heavy_row  row 0 rescaled to carry `weight` of the total ||X||_F^2
///   power_law      row i scaled so that ||x_i||^2 ~ (i + 1)^-exponent
enum class Coherence { incoherent, one_heavy_row, power_law };

std::string_view to_string(Coherence c) noexcept;
Coherence parse_coherence(std::string_view name);

struct SyntheticSpec {
  Index n = 1000;
  Index d = 10;
  Coherence coherence = Coherence::incoherent;
  double weight = 0.9;
  double exponent = 1.0;
  /// Entries of w_true are N(0, signal_scale^2 / d).
  double signal_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian design shaped by the coherence profile; labels drawn as
/// y_i = +1 with probability sigma(x_i^T w_true), else -1.
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace ssn
