#pragma once

// Experiment orchestration behind the ssn_bench CLI: JSON configuration,
// problem construction, (method, seed) run grids and the levscores, certify
// and condnums reports.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ssn/baselines.hpp"
#include "ssn/dataset.hpp"
#include "ssn/diagnostics.hpp"
#include "ssn/ssn.hpp"
#include "ssn/synthetic.hpp"

namespace ssn {

using Json = nlohmann::ordered_json;

struct DatasetSource {
  std::filesystem::path path;
  LoadOptions load;
  PreprocessOptions preprocess;
};

/// Exactly one of dataset / synthetic is set. Synthetic designs are used raw.
struct ProblemSpec {
  std::optional<DatasetSource> dataset;
  std::optional<SyntheticSpec> synthetic;
  LossKind loss = LossKind::logistic;
  double lambda = 0.01;

  void validate() const;
};

GlmProblem build_problem(const ProblemSpec& spec);

struct MethodEntry {
  std::string name;
  std::variant<SsnConfig, BaselineConfig> config;
};

struct ReferencePolicy {
  enum class Kind { compute_via_newton, load, none };
  Kind kind = Kind::compute_via_newton;
  double tol = 1e-12;
  std::filesystem::path path;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<MethodEntry> methods;
  std::vector<std::uint64_t> seeds{0};
  ReferencePolicy reference;
  std::filesystem::path output_dir = "out";
  bool diagnostics = false;
  int threads = 1;
  /// Applied to every method that does not set its own.
  std::optional<double> stop_rel_error;

  /// Throws ConfigError (missing or unknown keys, bad values, duplicate names).
  static ExperimentConfig from_json(const Json& j);
  /// Normalized form with every default spelled out; from_json(to_json()) is lossless.
  Json to_json() const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Budget grid {10d, 20d, ..., 100d} used by "budget_s": "sweep".
std::vector<double> default_budget_grid(Index d);

struct CellResult {
  std::string method;
  std::uint64_t seed = 0;
  std::filesystem::path csv;
  RunTrace trace;
};

/// Runs every (method, seed) cell from w0 = 0, writing <method>_<seed>.csv
/// and run_metadata.json into the output directory. Returns the metadata.
Json cmd_run(const ExperimentConfig& cfg, std::ostream& log);

struct LevscoresOptions {
  ProblemSpec problem;
  LeverageMode mode = LeverageMode::exact;
  Index sketch_rows = 0;
  double beta_safety = 2.0;
  double eps = 0.5;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::filesystem::path out_csv = "levscores.csv";
};

/// Scores of A(0) stacked with Q^{1/2}; writes "block,tau" and returns a summary.
Json cmd_levscores(const LevscoresOptions& opts, std::ostream& log);

struct CertifyOptions {
  ProblemSpec problem;
  Scheme scheme = Scheme::block_partial_leverage;
  /// Empty means the scheme's theoretical size at (eps, delta).
  std::optional<double> budget_s;
  int trials = 200;
  double eps = 0.5;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::filesystem::path out_json = "certify.json";
};

/// Draws `trials` sampled Hessians of A(0) and reports the fraction meeting
/// eps under the condition that matches the scheme (C2 for leverage, C1 otherwise).
Json cmd_certify(const CertifyOptions& opts, std::ostream& log);

struct CondnumsOptions {
  ProblemSpec problem;
  std::filesystem::path out_json = "condnums.json";
};

/// Condition numbers at w0 = 0 and at the Newton reference minimizer.
Json cmd_condnums(const CondnumsOptions& opts, std::ostream& log);

Json to_json(const ConditionNumbers& c);

}  // namespace ssn
