#include "ssn/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ssn/errors.hpp"
#include "ssn/rng.hpp"

namespace ssn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- JSON field access ------------------------------------------------------

/// Reads keys from one JSON object and rejects any key never asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + "." + key + " is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const Json& v = at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where_ + "." + key + " must be a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v.is_number()) throw ConfigError(where_ + "." + key + " must be a number");
        if constexpr (std::is_integral_v<T>) {
          const double x = v.get<double>();
          if (x != std::floor(x)) throw ConfigError(where_ + "." + key + " must be an integer");
          if constexpr (std::is_unsigned_v<T>) {
            if (x < 0) throw ConfigError(where_ + "." + key + " must be non-negative");
          }
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where_ + "." + key + " must be a string");
      }
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  template <class T>
  std::optional<T> get_opt(const std::string& key) {
    return has(key) ? std::optional<T>(get<T>(key)) : std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where_ + "." + key);
    }
  }

  const std::string& where() const { return where_; }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? Json(*v) : Json(nullptr);
}

std::string_view to_string(DataFormat f) { return f == DataFormat::libsvm ? "libsvm" : "csv"; }
std::string_view to_string(LabelPosition p) { return p == LabelPosition::first ? "first" : "last"; }

LabelPosition parse_label_position(std::string_view s) {
  if (s == "first") return LabelPosition::first;
  if (s == "last") return LabelPosition::last;
  throw ConfigError("label_position must be 'first' or 'last'");
}

// ---- problem ------------------------------------------------------------------

ProblemSpec problem_from_json(const Json& j, double lambda) {
  ObjectReader r(j, "problem");
  ProblemSpec p;
  p.lambda = lambda;
  p.loss = parse_loss_kind(r.get_or<std::string>("loss", "logistic"));
  if (r.has("dataset")) {
    ObjectReader d(r.at("dataset"), "problem.dataset");
    DatasetSource src;
    src.path = d.get<std::string>("path");
    src.load.format = parse_data_format(d.get_or<std::string>("format", "libsvm"));
    src.load.label_position = parse_label_position(d.get_or<std::string>("label_position", "last"));
    const std::string delim = d.get_or<std::string>("delimiter", ",");
    if (delim.size() != 1) throw ConfigError("problem.dataset.delimiter must be one character");
    src.load.delimiter = delim[0];
    if (d.has("num_features")) src.load.num_features = d.get<Index>("num_features");
    src.preprocess.normalize_columns = d.get_or<bool>("normalize_columns", true);
    src.preprocess.add_intercept = d.get_or<bool>("add_intercept", true);
    d.finish();
    p.dataset = std::move(src);
  }
  if (r.has("synthetic")) {
    ObjectReader s(r.at("synthetic"), "problem.synthetic");
    SyntheticSpec spec;
    spec.n = s.get<Index>("n");
    spec.d = s.get<Index>("d");
    spec.coherence = parse_coherence(s.get_or<std::string>("coherence", "incoherent"));
    spec.weight = s.get_or<double>("weight", spec.weight);
    spec.exponent = s.get_or<double>("exponent", spec.exponent);
    spec.signal_scale = s.get_or<double>("signal_scale", spec.signal_scale);
    spec.seed = s.get_or<std::uint64_t>("seed", 0);
    s.finish();
    p.synthetic = spec;
  }
  r.finish();
  p.validate();
  return p;
}

Json problem_to_json(const ProblemSpec& p) {
  Json j;
  j["loss"] = std::string(to_string(p.loss));
  if (p.dataset) {
    Json d;
    d["path"] = p.dataset->path.string();
    d["format"] = std::string(to_string(p.dataset->load.format));
    d["label_position"] = std::string(to_string(p.dataset->load.label_position));
    d["delimiter"] = std::string(1, p.dataset->load.delimiter);
    put_opt(d, "num_features", p.dataset->load.num_features);
    d["normalize_columns"] = p.dataset->preprocess.normalize_columns;
    d["add_intercept"] = p.dataset->preprocess.add_intercept;
    j["dataset"] = d;
  }
  if (p.synthetic) {
    const SyntheticSpec& s = *p.synthetic;
    j["synthetic"] = Json{{"n", s.n},
                          {"d", s.d},
                          {"coherence", std::string(to_string(s.coherence))},
                          {"weight", s.weight},
                          {"exponent", s.exponent},
                          {"signal_scale", s.signal_scale},
                          {"seed", s.seed}};
  }
  return j;
}

// ---- methods ------------------------------------------------------------------

MethodEntry ssn_from_json(ObjectReader& r, std::vector<MethodEntry>& sweep_out, Index d) {
  SsnConfig c;
  c.scheme = parse_scheme(r.get_or<std::string>("scheme", "plev"));
  bool sweep = false;
  if (r.has("budget_s")) {
    const Json& b = r.at("budget_s");
    if (b.is_string()) {
      const auto s = b.get<std::string>();
      if (s == "sweep") {
        sweep = true;
      } else if (s != "auto") {
        throw ConfigError(r.where() + ".budget_s must be a number, \"auto\" or \"sweep\"");
      }
    } else {
      c.budget_s = r.get<double>("budget_s");
    }
  }
  c.auto_eps = r.get_or<double>("auto_eps", c.auto_eps);
  c.auto_delta = r.get_or<double>("auto_delta", c.auto_delta);
  c.leverage_recompute_period = r.get_or<int>("leverage_recompute_period", c.leverage_recompute_period);
  c.leverage_mode = parse_leverage_mode(r.get_or<std::string>("leverage_mode", "exact"));
  c.fast_leverage.sketch_rows = r.get_or<Index>("sketch_rows", 0);
  c.fast_leverage.sketch_factor = r.get_or<double>("sketch_factor", c.fast_leverage.sketch_factor);
  c.fast_leverage.beta_safety = r.get_or<double>("beta_safety", c.fast_leverage.beta_safety);
  c.solver = parse_solver_kind(r.get_or<std::string>("solver", "auto"));
  c.solver_tol = r.get_or<double>("solver_tol", c.solver_tol);
  c.max_solver_iters = r.get_or<int>("max_solver_iters", 0);
  c.max_outer_iters = r.get_or<int>("max_outer_iters", c.max_outer_iters);
  c.stop_rel_error = r.get_opt<double>("stop_rel_error");
  c.stop_grad_norm = r.get_opt<double>("stop_grad_norm");
  std::string name = r.get_or<std::string>("name", c.method_name());
  c.validate();
  if (sweep) {
    for (double s : default_budget_grid(d)) {
      SsnConfig cs = c;
      cs.budget_s = s;
      sweep_out.push_back({name + "-s" + std::to_string(static_cast<long long>(s)), cs});
    }
    return {};
  }
  return {std::move(name), c};
}

MethodEntry baseline_from_json(ObjectReader& r, BaselineMethod m) {
  BaselineConfig c;
  c.method = m;
  c.inner_solver = parse_inner_solver(r.get_or<std::string>("inner_solver", "direct"));
  c.inner_tol = r.get_or<double>("inner_tol", c.inner_tol);
  c.lbfgs_history = r.get_or<int>("history", c.lbfgs_history);
  c.armijo_c = r.get_or<double>("armijo_c", c.armijo_c);
  if (r.has("step_rule")) {
    ObjectReader s(r.at("step_rule"), r.where() + ".step_rule");
    const auto kind = s.get_or<std::string>("kind", "fixed");
    if (kind == "fixed") {
      c.step_rule.kind = StepRule::Kind::fixed;
    } else if (kind == "backtracking") {
      c.step_rule.kind = StepRule::Kind::backtracking;
    } else {
      throw ConfigError(s.where() + ".kind must be 'fixed' or 'backtracking'");
    }
    c.step_rule.eta = s.get_opt<double>("eta");
    c.step_rule.alpha = s.get_or<double>("alpha", c.step_rule.alpha);
    c.step_rule.beta = s.get_or<double>("beta", c.step_rule.beta);
    s.finish();
  }
  c.mu = r.get_opt<double>("mu");
  c.max_iters = r.get_or<int>("max_iters", c.max_iters);
  c.stop_rel_error = r.get_opt<double>("stop_rel_error");
  c.stop_grad_norm = r.get_opt<double>("stop_grad_norm");
  std::string name = r.get_or<std::string>("name", c.method_name());
  c.validate();
  return {std::move(name), c};
}

Json method_to_json(const MethodEntry& m) {
  Json j;
  j["name"] = m.name;
  if (const auto* s = std::get_if<SsnConfig>(&m.config)) {
    j["type"] = "ssn";
    j["scheme"] = std::string(to_string(s->scheme));
    j["budget_s"] = s->budget_s ? Json(*s->budget_s) : Json("auto");
    j["auto_eps"] = s->auto_eps;
    j["auto_delta"] = s->auto_delta;
    j["leverage_recompute_period"] = s->leverage_recompute_period;
    j["leverage_mode"] = std::string(to_string(s->leverage_mode));
    j["sketch_rows"] = s->fast_leverage.sketch_rows;
    j["sketch_factor"] = s->fast_leverage.sketch_factor;
    j["beta_safety"] = s->fast_leverage.beta_safety;
    j["solver"] = std::string(to_string(s->solver));
    j["solver_tol"] = s->solver_tol;
    j["max_solver_iters"] = s->max_solver_iters;
    j["max_outer_iters"] = s->max_outer_iters;
    put_opt(j, "stop_rel_error", s->stop_rel_error);
    put_opt(j, "stop_grad_norm", s->stop_grad_norm);
  } else {
    const auto& b = std::get<BaselineConfig>(m.config);
    j["type"] = std::string(to_string(b.method));
    j["inner_solver"] = std::string(to_string(b.inner_solver));
    j["inner_tol"] = b.inner_tol;
    j["history"] = b.lbfgs_history;
    j["armijo_c"] = b.armijo_c;
    Json sr;
    sr["kind"] = b.step_rule.kind == StepRule::Kind::fixed ? "fixed" : "backtracking";
    put_opt(sr, "eta", b.step_rule.eta);
    sr["alpha"] = b.step_rule.alpha;
    sr["beta"] = b.step_rule.beta;
    j["step_rule"] = sr;
    put_opt(j, "mu", b.mu);
    j["max_iters"] = b.max_iters;
    put_opt(j, "stop_rel_error", b.stop_rel_error);
    put_opt(j, "stop_grad_norm", b.stop_grad_norm);
  }
  return j;
}

std::string_view to_string(ReferencePolicy::Kind k) {
  switch (k) {
    case ReferencePolicy::Kind::compute_via_newton:
      return "compute_via_newton";
    case ReferencePolicy::Kind::load:
      return "load";
    case ReferencePolicy::Kind::none:
      return "none";
  }
  return "none";
}

Vector load_vector(const std::filesystem::path& path, Index d) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open reference solution " + path.string());
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      try {
        vals.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw Error("reference solution contains a non-number: " + part);
      }
    }
  }
  if (static_cast<Index>(vals.size()) != d) {
    throw DimensionError("reference solution has " + std::to_string(vals.size()) + " entries, expected " +
                         std::to_string(d));
  }
  return Eigen::Map<Vector>(vals.data(), d);
}

Json trace_eps_json(const RunTrace& t) {
  Json arr = Json::array();
  for (const auto& r : t.records) {
    if (r.iter == 0) continue;
    Json e;
    e["iter"] = r.iter;
    put_opt(e, "eps_c1", r.eps_c1);
    put_opt(e, "eps_c2", r.eps_c2);
    put_opt(e, "eps0", r.eps0);
    arr.push_back(e);
  }
  return arr;
}

Json number_or_string(double v) { return std::isfinite(v) ? Json(v) : Json(v > 0 ? "inf" : "nan"); }

void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_json_file(const std::filesystem::path& p, const Json& j) {
  ensure_parent(p);
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

}  // namespace

// ---- public API ---------------------------------------------------------------

void ProblemSpec::validate() const {
  if (dataset.has_value() == synthetic.has_value()) {
    throw ConfigError("problem needs exactly one of 'dataset' or 'synthetic'");
  }
  if (!(lambda >= 0.0 && std::isfinite(lambda))) throw ConfigError("lambda must be finite and >= 0");
  if (synthetic) {
    const SyntheticSpec& s = *synthetic;
    if (s.d < 1) throw ConfigError("synthetic d must be >= 1");
    if (s.n < s.d) throw ConfigError("synthetic n must be >= d");
    if (!(s.weight > 0.0 && s.weight < 1.0)) throw ConfigError("synthetic weight must lie in (0, 1)");
    if (!(s.exponent > 0.0)) throw ConfigError("synthetic exponent must be > 0");
  }
}

GlmProblem build_problem(const ProblemSpec& spec) {
  spec.validate();
  if (spec.synthetic) {
    Dataset data = make_synthetic(*spec.synthetic);
    return GlmProblem(std::move(data.x), std::move(data.y), spec.lambda, spec.loss);
  }
  Dataset data = load_dataset(spec.dataset->path, spec.dataset->load);
  PreprocessResult pre = preprocess(data.x, spec.dataset->preprocess);
  return GlmProblem(std::move(pre.x), std::move(data.y), spec.lambda, spec.loss);
}

std::vector<double> default_budget_grid(Index d) {
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(static_cast<double>(10 * k * d));
  return grid;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ObjectReader r(j, "config");
  ExperimentConfig c;
  const double lambda = r.get<double>("lambda");
  c.problem = problem_from_json(r.at("problem"), lambda);
  // Sweep grids need d; read it from the source without loading large files twice.
  Index d = 0;
  if (c.problem.synthetic) d = c.problem.synthetic->d;

  const Json& methods = r.at("methods");
  if (!methods.is_array() || methods.empty()) throw ConfigError("config.methods must be a non-empty array");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    ObjectReader m(methods[i], "config.methods[" + std::to_string(i) + "]");
    const auto type = m.get<std::string>("type");
    if (type == "ssn") {
      std::vector<MethodEntry> sweep;
      if (m.has("budget_s") && m.at("budget_s") == "sweep" && d == 0) {
        d = build_problem(c.problem).d();
      }
      MethodEntry e = ssn_from_json(m, sweep, d);
      if (sweep.empty()) {
        c.methods.push_back(std::move(e));
      } else {
        for (auto& s : sweep) c.methods.push_back(std::move(s));
      }
    } else {
      c.methods.push_back(baseline_from_json(m, parse_baseline_method(type)));
    }
    m.finish();
  }

  if (r.has("seeds")) {
    const Json& s = r.at("seeds");
    if (!s.is_array()) throw ConfigError("config.seeds must be an array");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!v.is_number_unsigned()) throw ConfigError("config.seeds entries must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }

  if (r.has("reference_solution")) {
    const Json& rs = r.at("reference_solution");
    if (rs.is_string()) {
      const auto s = rs.get<std::string>();
      if (s == "none") {
        c.reference.kind = ReferencePolicy::Kind::none;
      } else if (s == "compute_via_newton") {
        c.reference.kind = ReferencePolicy::Kind::compute_via_newton;
      } else {
        throw ConfigError("config.reference_solution must be 'none', 'compute_via_newton' or an object");
      }
    } else {
      ObjectReader p(rs, "config.reference_solution");
      const auto policy = p.get<std::string>("policy");
      if (policy == "compute_via_newton") {
        c.reference.kind = ReferencePolicy::Kind::compute_via_newton;
      } else if (policy == "load") {
        c.reference.kind = ReferencePolicy::Kind::load;
      } else if (policy == "none") {
        c.reference.kind = ReferencePolicy::Kind::none;
      } else {
        throw ConfigError("unknown reference_solution policy '" + policy + "'");
      }
      c.reference.tol = p.get_or<double>("tol", c.reference.tol);
      if (p.has("path")) c.reference.path = p.get<std::string>("path");
      p.finish();
    }
  }

  if (r.has("outputs")) {
    ObjectReader o(r.at("outputs"), "config.outputs");
    c.output_dir = o.get_or<std::string>("directory", "out");
    if (o.has("formats")) {
      for (const auto& f : o.at("formats")) {
        if (f != "csv" && f != "json") throw ConfigError("config.outputs.formats accepts 'csv' and 'json'");
      }
    }
    o.finish();
  }
  c.diagnostics = r.get_or<bool>("diagnostics", false);
  c.threads = r.get_or<int>("threads", 1);
  c.stop_rel_error = r.get_opt<double>("stop_rel_error");
  r.finish();
  c.validate();
  return c;
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["problem"] = problem_to_json(problem);
  j["lambda"] = problem.lambda;
  Json ms = Json::array();
  for (const auto& m : methods) ms.push_back(method_to_json(m));
  j["methods"] = ms;
  j["seeds"] = seeds;
  Json ref;
  ref["policy"] = std::string(to_string(reference.kind));
  ref["tol"] = reference.tol;
  if (reference.kind == ReferencePolicy::Kind::load) ref["path"] = reference.path.string();
  j["reference_solution"] = ref;
  j["outputs"] = Json{{"directory", output_dir.string()}, {"formats", Json::array({"csv", "json"})}};
  j["diagnostics"] = diagnostics;
  j["threads"] = threads;
  put_opt(j, "stop_rel_error", stop_rel_error);
  return j;
}

void ExperimentConfig::validate() const {
  problem.validate();
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (stop_rel_error && !(*stop_rel_error > 0.0)) throw ConfigError("stop_rel_error must be > 0");
  if (reference.kind == ReferencePolicy::Kind::load && reference.path.empty()) {
    throw ConfigError("reference_solution policy 'load' needs a path");
  }
  if (!(reference.tol > 0.0)) throw ConfigError("reference_solution.tol must be > 0");
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (m.name.empty() || m.name.find_first_of("/\\") != std::string::npos) {
      throw ConfigError("method names must be non-empty and free of path separators");
    }
    if (!names.insert(m.name).second) throw ConfigError("duplicate method name '" + m.name + "'; set 'name'");
    std::visit([](const auto& c) { c.validate(); }, m.config);
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

Json to_json(const ConditionNumbers& c) {
  Json j;
  j["kappa"] = number_or_string(c.kappa);
  j["kappa_raw"] = number_or_string(c.kappa_raw);
  j["kappa_hat"] = number_or_string(c.kappa_hat);
  j["kappa_bar"] = number_or_string(c.kappa_bar);
  j["lambda_min"] = c.lambda_min;
  j["lambda_max"] = c.lambda_max;
  return j;
}

Json cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const GlmProblem problem = build_problem(cfg.problem);
  const Vector w0 = Vector::Zero(problem.d());
  std::filesystem::create_directories(cfg.output_dir);

  RunOptions base;
  switch (cfg.reference.kind) {
    case ReferencePolicy::Kind::compute_via_newton:
      base.reference = reference_solution(problem, cfg.reference.tol);
      break;
    case ReferencePolicy::Kind::load:
      base.reference = load_vector(cfg.reference.path, problem.d());
      break;
    case ReferencePolicy::Kind::none:
      break;
  }

  struct Cell {
    const MethodEntry* method;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& m : cfg.methods)
    for (auto s : cfg.seeds) cells.push_back({&m, s});
  std::vector<std::optional<CellResult>> results(cells.size());
  std::vector<std::string> errors(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      try {
        RunOptions opts = base;
        RunResult res;
        if (const auto* s = std::get_if<SsnConfig>(&c.method->config)) {
          SsnConfig sc = *s;
          sc.seed = c.seed;
          if (!sc.stop_rel_error) sc.stop_rel_error = cfg.stop_rel_error;
          opts.instrument = cfg.diagnostics;
          res = ssn_run(problem, w0, sc, opts);
        } else {
          BaselineConfig bc = std::get<BaselineConfig>(c.method->config);
          bc.seed = c.seed;
          if (!bc.stop_rel_error) bc.stop_rel_error = cfg.stop_rel_error;
          res = baseline_run(problem, w0, bc, opts);
        }
        res.trace.method = c.method->name;
        const auto csv = cfg.output_dir / (c.method->name + "_" + std::to_string(c.seed) + ".csv");
        std::ofstream out(csv);
        if (!out) throw Error("cannot write " + csv.string());
        write_trace_csv(out, res.trace);
        {
          const std::lock_guard lock(log_mutex);
          log << c.method->name << " seed " << c.seed << ": " << to_string(res.trace.status) << " after "
              << res.trace.records.size() - 1 << " iterations -> " << csv.string() << '\n';
        }
        results[i] = CellResult{c.method->name, c.seed, csv, std::move(res.trace)};
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Json meta;
  meta["config"] = cfg.to_json();
  meta["problem_shape"] = Json{{"n", problem.n()}, {"d", problem.d()}};
  const HessianFactorization f0 = hessian_factorization(problem, w0);
  Json conds;
  conds["w0"] = to_json(condition_numbers(f0.a, f0.q));
  if (base.reference) {
    const HessianFactorization fs = hessian_factorization(problem, *base.reference);
    conds["w_star"] = to_json(condition_numbers(fs.a, fs.q));
  }
  meta["condition_numbers"] = conds;
  Json runs = Json::array();
  std::string first_error;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Json r;
    r["method"] = cells[i].method->name;
    r["seed"] = cells[i].seed;
    if (results[i]) {
      const RunTrace& t = results[i]->trace;
      r["csv"] = results[i]->csv.filename().string();
      r["status"] = std::string(to_string(t.status));
      r["message"] = t.message;
      r["iterations"] = t.records.size() - 1;
      if (cfg.diagnostics && std::holds_alternative<SsnConfig>(cells[i].method->config)) {
        r["measured_eps"] = trace_eps_json(t);
      }
    } else {
      r["status"] = "error";
      r["message"] = errors[i];
      if (first_error.empty()) first_error = errors[i];
    }
    runs.push_back(r);
  }
  meta["runs"] = runs;
  write_json_file(cfg.output_dir / "run_metadata.json", meta);
  if (!first_error.empty()) throw Error("some runs failed; first error: " + first_error);
  return meta;
}

Json cmd_levscores(const LevscoresOptions& opts, std::ostream& log) {
  const GlmProblem problem = build_problem(opts.problem);
  const HessianFactorization f = hessian_factorization(problem, Vector::Zero(problem.d()));
  LeverageScores scores;
  if (opts.mode == LeverageMode::exact) {
    scores = exact_block_partial_leverage_scores(f.a, f.q);
  } else {
    FastLeverageOptions fo;
    fo.sketch_rows = opts.sketch_rows;
    fo.beta_safety = opts.beta_safety;
    fo.seed = opts.seed;
    scores = fast_block_partial_leverage_scores(f.a, f.q, fo);
  }
  ensure_parent(opts.out_csv);
  std::ofstream out(opts.out_csv);
  if (!out) throw Error("cannot write " + opts.out_csv.string());
  out << "block,tau\n";
  for (Index i = 0; i < scores.tau.size(); ++i) out << i << ',' << format_number(scores.tau(i)) << '\n';
  const double sum = scores.sum();
  const Index s = sampling_size_leverage(sum, problem.d(), opts.eps, opts.delta);
  log << "sum_tau " << format_number(sum) << '\n'
      << "sampling_size_leverage(eps=" << opts.eps << ", delta=" << opts.delta << ") " << s << '\n';
  Json j;
  j["mode"] = std::string(to_string(opts.mode));
  j["blocks"] = scores.tau.size();
  j["d"] = problem.d();
  j["lambda"] = problem.lambda();
  j["sum_tau"] = sum;
  j["beta_bound"] = scores.beta_bound;
  j["eps"] = opts.eps;
  j["delta"] = opts.delta;
  j["sampling_size"] = s;
  j["csv"] = opts.out_csv.string();
  return j;
}

Json cmd_certify(const CertifyOptions& opts, std::ostream& log) {
  if (opts.trials < 1) throw ConfigError("trials must be >= 1");
  if (!(opts.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (opts.budget_s && !(*opts.budget_s >= 1.0)) throw ConfigError("budget s must be >= 1");
  const GlmProblem problem = build_problem(opts.problem);
  const HessianFactorization f = hessian_factorization(problem, Vector::Zero(problem.d()));
  const Index d = problem.d();

  Vector p;
  double budget = 0.0;
  switch (opts.scheme) {
    case Scheme::block_partial_leverage: {
      const LeverageScores sc = exact_block_partial_leverage_scores(f.a, f.q);
      p = leverage_distribution(sc);
      budget = opts.budget_s ? *opts.budget_s
                             : static_cast<double>(sampling_size_leverage(sc.sum(), d, opts.eps, opts.delta));
      break;
    }
    case Scheme::block_norm_squares:
      p = block_norm_squares_distribution(f.a);
      budget = opts.budget_s ? *opts.budget_s
                             : static_cast<double>(sampling_size_block_norms(stable_rank(f.a), d, opts.eps, opts.delta));
      break;
    case Scheme::uniform:
      p = uniform_distribution(f.a.block_count());
      budget = opts.budget_s ? *opts.budget_s
                             : static_cast<double>(sampling_size_uniform(f.a, d, opts.eps, opts.delta));
      break;
  }
  const SamplingPlan plan = SamplingPlan::make(opts.scheme, p, budget, opts.seed);

  std::optional<C2Meter> meter;
  try {
    meter.emplace(f.a, f.q);
  } catch (const Error&) {
    if (opts.scheme == Scheme::block_partial_leverage) throw;
  }
  const Matrix h = meter ? meter->hessian() : f.hessian();
  int ok_c1 = 0, ok_c2 = 0, empty = 0;
  std::vector<double> e1s, e2s;
  for (int t = 0; t < opts.trials; ++t) {
    double e1 = kInf, e2 = kInf;
    try {
      const BlockSample s = draw_block_sample(plan, derive_seed(opts.seed, static_cast<std::uint64_t>(t)));
      const Matrix ht = sampled_hessian(f.a, f.q, s);
      e1 = measure_c1(h, ht);
      if (meter) e2 = meter->measure_tilde(ht);
    } catch (const EmptySampleError&) {
      ++empty;
    }
    ok_c1 += e1 <= opts.eps;
    ok_c2 += e2 <= opts.eps;
    e1s.push_back(e1);
    e2s.push_back(e2);
  }
  const bool use_c2 = opts.scheme == Scheme::block_partial_leverage;
  const double frac_c1 = static_cast<double>(ok_c1) / opts.trials;
  const double frac_c2 = meter ? static_cast<double>(ok_c2) / opts.trials : 0.0;
  const double frac = use_c2 ? frac_c2 : frac_c1;
  log << "scheme " << to_string(opts.scheme) << ", s = " << format_number(budget) << ", expected kept "
      << format_number(plan.expected_kept()) << '\n'
      << "success fraction (" << (use_c2 ? "C2" : "C1") << ", eps " << opts.eps << "): " << frac << " over "
      << opts.trials << " trials (target " << 1.0 - opts.delta << ")\n";

  Json j;
  j["scheme"] = std::string(to_string(opts.scheme));
  j["budget_s"] = budget;
  j["expected_kept"] = plan.expected_kept();
  j["trials"] = opts.trials;
  j["eps"] = opts.eps;
  j["delta"] = opts.delta;
  j["seed"] = opts.seed;
  j["condition"] = use_c2 ? "c2" : "c1";
  j["success_fraction"] = frac;
  j["success_fraction_c1"] = frac_c1;
  j["success_fraction_c2"] = meter ? Json(frac_c2) : Json(nullptr);
  j["target_fraction"] = 1.0 - opts.delta;
  j["empty_samples"] = empty;
  Json e1 = Json::array(), e2 = Json::array();
  for (double v : e1s) e1.push_back(number_or_string(v));
  for (double v : e2s) e2.push_back(number_or_string(v));
  j["eps_c1"] = e1;
  j["eps_c2"] = meter ? e2 : Json(nullptr);
  write_json_file(opts.out_json, j);
  return j;
}

Json cmd_condnums(const CondnumsOptions& opts, std::ostream& log) {
  const GlmProblem problem = build_problem(opts.problem);
  const Vector w0 = Vector::Zero(problem.d());
  const Vector ws = reference_solution(problem);
  const HessianFactorization f0 = hessian_factorization(problem, w0);
  const HessianFactorization fs = hessian_factorization(problem, ws);
  const ConditionNumbers c0 = condition_numbers(f0.a, f0.q);
  const ConditionNumbers cs = condition_numbers(fs.a, fs.q);
  auto print = [&log](const char* where, const ConditionNumbers& c) {
    log << where << ": kappa " << c.kappa << "  kappa_raw " << c.kappa_raw << "  kappa_hat " << c.kappa_hat
        << "  kappa_bar " << c.kappa_bar << '\n';
  };
  print("w0", c0);
  print("w*", cs);
  Json j;
  j["n"] = problem.n();
  j["d"] = problem.d();
  j["lambda"] = problem.lambda();
  j["w0"] = to_json(c0);
  j["w_star"] = to_json(cs);
  j["w_star_grad_norm"] = gradient(problem, ws).norm();
  write_json_file(opts.out_json, j);
  return j;
}

}  // namespace ssn
