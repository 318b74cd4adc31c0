#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Factorization met a (numerically) singular matrix.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Cholesky met a non-positive pivot, or CG met non-positive curvature.
class IndefiniteMatrixError : public Error {
 public:
  using Error::Error;
};

/// Input is valid syntactically but carries no usable information (all-zero matrix, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// No block survived Bernoulli inclusion.
class EmptySampleError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration value or violated precondition on parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ssn
