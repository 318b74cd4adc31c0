#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssn/linalg.hpp"

namespace ssn {

enum class DataFormat { libsvm, csv };
enum class LabelPosition { first, last };

DataFormat parse_data_format(std::string_view name);

struct LoadOptions {
  DataFormat format = DataFormat::libsvm;
  /// CSV only.
  LabelPosition label_position = LabelPosition::last;
  char delimiter = ',';
  /// LIBSVM only: feature count; defaults to the largest index seen.
  std::optional<Index> num_features;
};

struct Dataset {
  Matrix x;
  Vector y;
  /// Human-readable record of how raw labels were mapped to +-1, e.g. "0->-1,1->+1".
  std::string label_mapping;
};

/// Reads LIBSVM ("<label> <idx>:<val> ...", 1-based indices) or CSV rows.
/// Labels {0,1} and {1,2} are remapped to {-1,+1}; any other label set
/// besides {-1,+1} is rejected. Malformed lines raise ParseError.
Dataset parse_dataset(std::istream& in, const LoadOptions& opts);
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts);

/// Writes values in shortest round-trip form, so parse(write(D)) == D bit for bit.
void write_dataset(std::ostream& out, const Dataset& data, const LoadOptions& opts);

struct PreprocessOptions {
  bool normalize_columns = true;
  bool add_intercept = true;
};

struct PreprocessResult {
  Matrix x;
  /// Columns left unscaled because they are identically zero.
  std::vector<Index> zero_columns;
  std::vector<std::string> warnings;
};

/// Unit-norm columns (zero columns untouched), then an optional trailing
/// all-ones intercept column.
PreprocessResult preprocess(const Matrix& x, const PreprocessOptions& opts);

}  // namespace ssn
