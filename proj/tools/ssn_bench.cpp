// ssn_bench: command-line front end for sub-sampled Newton experiments.
//
//   ssn_bench run --config exp.json
//   ssn_bench levscores --dataset a9a --lambda 0.01 --mode fast
//   ssn_bench certify --synthetic-n 5000 --synthetic-d 20 --coherence one_heavy_row --scheme plev
//   ssn_bench condnums --dataset a9a --lambda 0.01
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssn/errors.hpp"
#include "ssn/experiment.hpp"

namespace {

struct ProblemFlags {
  std::string dataset;
  std::string format = "libsvm";
  std::string label_position = "last";
  bool no_normalize = false;
  bool no_intercept = false;
  ssn::Index synthetic_n = 0;
  ssn::Index synthetic_d = 0;
  std::string coherence = "incoherent";
  double weight = 0.9;
  double exponent = 1.0;
  std::uint64_t synthetic_seed = 0;
  std::string loss = "logistic";
  double lambda = 0.01;

  void attach(CLI::App* app) {
    app->add_option("--dataset", dataset, "LIBSVM or CSV data file");
    app->add_option("--format", format, "libsvm or csv")->check(CLI::IsMember({"libsvm", "csv"}));
    app->add_option("--label-position", label_position, "CSV label column: first or last")
        ->check(CLI::IsMember({"first", "last"}));
    app->add_flag("--no-normalize", no_normalize, "keep raw column scales");
    app->add_flag("--no-intercept", no_intercept, "do not append an intercept column");
    app->add_option("--synthetic-n", synthetic_n, "rows of a synthetic design (instead of --dataset)");
    app->add_option("--synthetic-d", synthetic_d, "columns of a synthetic design");
    app->add_option("--coherence", coherence, "incoherent, one_heavy_row or power_law");
    app->add_option("--weight", weight, "one_heavy_row mass fraction");
    app->add_option("--exponent", exponent, "power_law exponent");
    app->add_option("--synthetic-seed", synthetic_seed, "synthetic generator seed");
    app->add_option("--loss", loss, "logistic or squared");
    app->add_option("--lambda", lambda, "ridge parameter");
  }

  ssn::ProblemSpec spec() const {
    ssn::ProblemSpec p;
    p.loss = ssn::parse_loss_kind(loss);
    p.lambda = lambda;
    if (!dataset.empty()) {
      ssn::DatasetSource src;
      src.path = dataset;
      src.load.format = ssn::parse_data_format(format);
      src.load.label_position = label_position == "first" ? ssn::LabelPosition::first : ssn::LabelPosition::last;
      src.preprocess.normalize_columns = !no_normalize;
      src.preprocess.add_intercept = !no_intercept;
      p.dataset = std::move(src);
    }
    if (synthetic_n > 0 || synthetic_d > 0) {
      ssn::SyntheticSpec s;
      s.n = synthetic_n;
      s.d = synthetic_d;
      s.coherence = ssn::parse_coherence(coherence);
      s.weight = weight;
      s.exponent = exponent;
      s.seed = synthetic_seed;
      p.synthetic = s;
    }
    p.validate();
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-sampled Newton benchmark harness"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
  app.add_option("--seed", seed, "base seed (overrides config seeds for run)");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for run")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "run a method/seed grid from a JSON config");
  std::string config_path;
  run->add_option("config,--config", config_path, "JSON experiment config");

  auto* lev = app.add_subcommand("levscores", "block partial leverage scores of A(0)");
  ProblemFlags lev_p;
  lev_p.attach(lev);
  std::string lev_mode = "exact";
  ssn::Index sketch_rows = 0;
  double beta_safety = 2.0, lev_eps = 0.5, lev_delta = 0.1;
  std::string lev_out;
  lev->add_option("--mode", lev_mode, "exact or fast")->check(CLI::IsMember({"exact", "fast"}));
  lev->add_option("--sketch-rows", sketch_rows, "sketch size for fast mode (default 20 d)");
  lev->add_option("--beta-safety", beta_safety, "fast-mode overestimation factor");
  lev->add_option("--eps", lev_eps, "accuracy for the printed sampling size");
  lev->add_option("--delta", lev_delta, "failure probability for the printed sampling size");
  lev->add_option("--out", lev_out, "scores CSV path (default <out-dir>/levscores.csv)");

  auto* cert = app.add_subcommand("certify", "empirical success rate of a sampling scheme");
  ProblemFlags cert_p;
  cert_p.attach(cert);
  std::string scheme = "plev", budget = "auto";
  int trials = 200;
  double cert_eps = 0.5, cert_delta = 0.1;
  cert->add_option("--scheme", scheme, "uniform, rnorm or plev");
  cert->add_option("-s,--budget", budget, "sample budget s or 'auto' for the theoretical size");
  cert->add_option("--trials", trials, "number of sampled Hessians")->check(CLI::PositiveNumber);
  cert->add_option("--eps", cert_eps, "accuracy threshold");
  cert->add_option("--delta", cert_delta, "failure probability");

  auto* cond = app.add_subcommand("condnums", "condition numbers at w0 = 0 and at w*");
  ProblemFlags cond_p;
  cond_p.attach(cond);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);
  try {
    if (*run) {
      if (config_path.empty()) throw ssn::ConfigError("run needs a config file");
      ssn::ExperimentConfig cfg = ssn::load_experiment_config(config_path);
      if (seed) cfg.seeds = {*seed};
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (threads > 0) cfg.threads = threads;
      ssn::cmd_run(cfg, std::cout);
    } else if (*lev) {
      ssn::LevscoresOptions o;
      o.problem = lev_p.spec();
      o.mode = ssn::parse_leverage_mode(lev_mode);
      o.sketch_rows = sketch_rows;
      o.beta_safety = beta_safety;
      o.eps = lev_eps;
      o.delta = lev_delta;
      o.seed = seed.value_or(0);
      o.out_csv = lev_out.empty() ? out / "levscores.csv" : std::filesystem::path(lev_out);
      const ssn::Json j = ssn::cmd_levscores(o, std::cout);
      std::filesystem::path jp = o.out_csv;
      jp.replace_extension(".json");
      std::filesystem::create_directories(jp.parent_path().empty() ? "." : jp.parent_path());
      std::ofstream(jp) << j.dump(2) << '\n';
    } else if (*cert) {
      ssn::CertifyOptions o;
      o.problem = cert_p.spec();
      o.scheme = ssn::parse_scheme(scheme);
      if (budget != "auto") {
        try {
          o.budget_s = std::stod(budget);
        } catch (const std::exception&) {
          throw ssn::ConfigError("--budget must be a number or 'auto'");
        }
      }
      o.trials = trials;
      o.eps = cert_eps;
      o.delta = cert_delta;
      o.seed = seed.value_or(0);
      o.out_json = out / "certify.json";
      ssn::cmd_certify(o, std::cout);
    } else if (*cond) {
      ssn::CondnumsOptions o;
      o.problem = cond_p.spec();
      o.out_json = out / "condnums.json";
      ssn::cmd_condnums(o, std::cout);
    }
  } catch (const ssn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ssn::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
