#include "ssn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ssn/errors.hpp"

namespace ssn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct RawRow {
  double label;
  std::vector<std::pair<Index, double>> features;  // 0-based
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Maps the raw label set onto {-1, +1}.
std::string remap_labels(Vector& y) {
  std::set<double> labels(y.data(), y.data() + y.size());
  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(labels.begin(), labels.end(),
                       [&](double l) { return std::find(allowed.begin(), allowed.end(), l) != allowed.end(); });
  };
  if (subset_of({-1.0, 1.0})) return "-1->-1,+1->+1";
  double neg = 0.0, pos = 0.0;
  std::string mapping;
  if (subset_of({0.0, 1.0})) {
    neg = 0.0, pos = 1.0, mapping = "0->-1,1->+1";
  } else if (subset_of({1.0, 2.0})) {
    neg = 1.0, pos = 2.0, mapping = "1->-1,2->+1";
  } else {
    std::ostringstream msg;
    msg << "unsupported label set {";
    for (double l : labels) msg << ' ' << l;
    msg << " }; expected {-1,+1}, {0,1} or {1,2}";
    throw Error(msg.str());
  }
  for (Index i = 0; i < y.size(); ++i) y(i) = y(i) == pos ? 1.0 : (y(i) == neg ? -1.0 : y(i));
  return mapping;
}

Dataset parse_libsvm(std::istream& in, const LoadOptions& opts) {
  std::vector<RawRow> rows;
  Index max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto toks = split_ws(sv);
    RawRow row{parse_double(toks[0], lineno), {}};
    Index prev = 0;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const auto colon = toks[t].find(':');
      if (colon == std::string_view::npos) throw ParseError(lineno, "expected index:value, got '" + std::string(toks[t]) + "'");
      const auto idx_tok = toks[t].substr(0, colon);
      long long idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() || idx < 1) {
        throw ParseError(lineno, "bad feature index '" + std::string(idx_tok) + "'");
      }
      if (idx <= prev) throw ParseError(lineno, "feature indices must be strictly increasing");
      prev = static_cast<Index>(idx);
      if (opts.num_features && idx > *opts.num_features) {
        throw ParseError(lineno, "feature index " + std::to_string(idx) + " exceeds declared feature count");
      }
      row.features.emplace_back(static_cast<Index>(idx - 1), parse_double(toks[t].substr(colon + 1), lineno));
      max_index = std::max<Index>(max_index, static_cast<Index>(idx));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("dataset has no rows");
  const Index d = opts.num_features.value_or(max_index);
  if (d < 1) throw Error("dataset has no features");
  Dataset out{Matrix::Zero(static_cast<Index>(rows.size()), d), Vector(static_cast<Index>(rows.size())), {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Index>(i);
    out.y(r) = rows[i].label;
    for (const auto& [c, v] : rows[i].features) out.x(r, c) = v;
  }
  out.label_mapping = remap_labels(out.y);
  return out;
}

Dataset parse_csv(std::istream& in, const LoadOptions& opts) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::vector<double> vals;
    std::size_t start = 0;
    while (true) {
      const auto pos = sv.find(opts.delimiter, start);
      vals.push_back(parse_double(sv.substr(start, pos == std::string_view::npos ? sv.npos : pos - start), lineno));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (vals.size() < 2) throw ParseError(lineno, "CSV row needs a label and at least one feature");
    if (width == 0) width = vals.size();
    if (vals.size() != width) {
      throw ParseError(lineno, "inconsistent feature count: expected " + std::to_string(width - 1) + ", got " +
                                   std::to_string(vals.size() - 1));
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error("dataset has no rows");
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(width - 1);
  Dataset out{Matrix(n, d), Vector(n), {}};
  const bool first = opts.label_position == LabelPosition::first;
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    out.y(i) = first ? r.front() : r.back();
    for (Index c = 0; c < d; ++c) out.x(i, c) = r[static_cast<std::size_t>(c + (first ? 1 : 0))];
  }
  out.label_mapping = remap_labels(out.y);
  return out;
}

}  // namespace

DataFormat parse_data_format(std::string_view name) {
  if (name == "libsvm") return DataFormat::libsvm;
  if (name == "csv") return DataFormat::csv;
  throw ConfigError("unknown data format '" + std::string(name) + "'");
}

Dataset parse_dataset(std::istream& in, const LoadOptions& opts) {
  return opts.format == DataFormat::libsvm ? parse_libsvm(in, opts) : parse_csv(in, opts);
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, opts);
}

void write_dataset(std::ostream& out, const Dataset& data, const LoadOptions& opts) {
  for (Index i = 0; i < data.x.rows(); ++i) {
    if (opts.format == DataFormat::libsvm) {
      out << format_double(data.y(i));
      for (Index c = 0; c < data.x.cols(); ++c) {
        if (data.x(i, c) != 0.0) out << ' ' << (c + 1) << ':' << format_double(data.x(i, c));
      }
    } else {
      const bool first = opts.label_position == LabelPosition::first;
      if (first) out << format_double(data.y(i)) << opts.delimiter;
      for (Index c = 0; c < data.x.cols(); ++c) {
        if (c > 0) out << opts.delimiter;
        out << format_double(data.x(i, c));
      }
      if (!first) out << opts.delimiter << format_double(data.y(i));
    }
    out << '\n';
  }
}

PreprocessResult preprocess(const Matrix& x, const PreprocessOptions& opts) {
  if (x.rows() < 1 || x.cols() < 1) throw DimensionError("cannot preprocess an empty matrix");
  PreprocessResult res;
  res.x = x;
  if (opts.normalize_columns) {
    for (Index c = 0; c < x.cols(); ++c) {
      const double norm = res.x.col(c).norm();
      if (norm == 0.0) {
        res.zero_columns.push_back(c);
        res.warnings.push_back("column " + std::to_string(c) + " is identically zero; left unscaled");
        continue;
      }
      res.x.col(c) /= norm;
    }
  }
  if (opts.add_intercept) {
    res.x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    res.x.col(x.cols()).setOnes();
  }
  return res;
}

}  // namespace ssn
