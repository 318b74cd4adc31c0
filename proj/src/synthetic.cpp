#include "ssn/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ssn/errors.hpp"

namespace ssn {

std::string_view to_string(Coherence c) noexcept {
  switch (c) {
    case Coherence::incoherent:
      return "incoherent";
    case Coherence::one_heavy_row:
      return "one_heavy_row";
    case Coherence::power_law:
      return "power_law";
  }
  return "unknown";
}

Coherence parse_coherence(std::string_view name) {
  if (name == "incoherent") return Coherence::incoherent;
  if (name == "one_heavy_row") return Coherence::one_heavy_row;
  if (name == "power_law") return Coherence::power_law;
  throw ConfigError("unknown coherence profile '" + std::string(name) + "'");
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw ConfigError("synthetic n and d must be positive");
  if (spec.n < spec.d) throw ConfigError("synthetic problems need n >= d");
  if (spec.coherence == Coherence::one_heavy_row && !(spec.weight > 0.0 && spec.weight < 1.0)) {
    throw ConfigError("one_heavy_row weight must lie in (0, 1)");
  }
  if (spec.coherence == Coherence::power_law && !(spec.exponent > 0.0)) {
    throw ConfigError("power_law exponent must be > 0");
  }
  if (spec.coherence == Coherence::one_heavy_row && spec.n < 2) throw ConfigError("one_heavy_row needs n >= 2");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out{Matrix(spec.n, spec.d), Vector(spec.n), "synthetic"};
  for (Index i = 0; i < spec.n; ++i)
    for (Index c = 0; c < spec.d; ++c) out.x(i, c) = normal(rng);

  switch (spec.coherence) {
    case Coherence::incoherent:
      break;
    case Coherence::one_heavy_row: {
      const double rest = out.x.bottomRows(spec.n - 1).squaredNorm();
      const double target = spec.weight / (1.0 - spec.weight) * rest;
      out.x.row(0) *= std::sqrt(target / out.x.row(0).squaredNorm());
      break;
    }
    case Coherence::power_law:
      for (Index i = 0; i < spec.n; ++i) {
        out.x.row(i) *= std::pow(static_cast<double>(i + 1), -0.5 * spec.exponent);
      }
      break;
  }

  Vector w_true(spec.d);
  const double sd = spec.signal_scale / std::sqrt(static_cast<double>(spec.d));
  for (Index c = 0; c < spec.d; ++c) w_true(c) = sd * normal(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < spec.n; ++i) {
    const double m = out.x.row(i).dot(w_true);
    const double prob = 1.0 / (1.0 + std::exp(-m));
    out.y(i) = unif(rng) < prob ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace ssn
