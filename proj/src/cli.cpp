#include "ait/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ait/baselines.hpp"
#include "ait/io.hpp"

#ifndef AIT_VERSION
#define AIT_VERSION "0.0.0"
#endif

namespace ait {

namespace {

namespace fs = std::filesystem;

/// Usage problem detected after parsing (missing --seed and similar).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Context {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  fs::path output_dir;
  std::ostream& out;
};

struct Outcome {
  std::vector<std::string> outputs;
  int exit_code = kExitOk;
};

std::uint64_t require_seed(const Context& ctx, const std::string& command) {
  if (!ctx.seed) throw UsageError(command + " needs --seed");
  return *ctx.seed;
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_required(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + " needs field '" + key + "'");
  return get_or<T>(j, key, T{});
}

std::vector<Index> index_list(const Json& j, const char* key) {
  const Json& v = j.at(key);
  std::vector<Index> out;
  if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_number_integer()) throw ConfigError(std::string(key) + " must hold integers");
      out.push_back(item.get<Index>());
    }
    return out;
  }
  if (v.is_object()) {
    require_known_keys(v, {"from", "to", "step"}, key);
    const auto from = get_required<Index>(v, "from", key);
    const auto to = get_required<Index>(v, "to", key);
    const auto step = get_or<Index>(v, "step", 1);
    if (step < 1) throw ConfigError(std::string(key) + ".step must be positive");
    for (Index x = from; x <= to; x += step) out.push_back(x);
    return out;
  }
  throw ConfigError(std::string(key) + " must be an array or a {from, to, step} range");
}

std::vector<Algorithm> algorithm_list(const Json& j) {
  if (!j.contains("algorithms")) return default_algorithms();
  const Json& v = j.at("algorithms");
  if (!v.is_array()) throw ConfigError("algorithms must be an array of names");
  std::vector<Algorithm> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError("algorithms must be an array of names");
    out.push_back(Algorithm::parse(item.get<std::string>()));
  }
  return out;
}

Json algorithm_labels(const std::vector<Algorithm>& algorithms) {
  Json out = Json::array();
  for (const auto& a : algorithms) out.push_back(a.label());
  return out;
}

TrialSettings trial_settings(const Json& j) {
  TrialSettings s;
  s.max_iter = get_or<int>(j, "max_iter", s.max_iter);
  s.stop_tol = get_or<double>(j, "stop_tol", s.stop_tol);
  if (s.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(s.stop_tol >= 0.0)) throw ConfigError("stop_tol must be nonnegative");
  return s;
}

// Experiment spec schemas. Each parse_* validates and fills defaults; the
// matching resolve_* writes the fully resolved form recorded in manifests.

SparsitySweepSpec parse_sweep(const Json& j, std::uint64_t seed) {
  require_known_keys(j, {"experiment", "problem", "k_values", "algorithms", "trials",
                         "max_iter", "stop_tol", "success_threshold"},
                     "sparsity_sweep");
  SparsitySweepSpec spec;
  spec.base = problem_spec_from_json(j.value("problem", Json::object()));
  if (!j.contains("k_values")) throw ConfigError("sparsity_sweep needs k_values");
  spec.k_values = index_list(j, "k_values");
  spec.algorithms = algorithm_list(j);
  spec.trials = get_or<int>(j, "trials", 1);
  spec.settings = trial_settings(j);
  spec.master_seed = seed;
  spec.validate();
  return spec;
}

NormalizationSpec parse_normalization(const Json& j, std::uint64_t seed) {
  require_known_keys(j, {"experiment", "problem", "algorithms", "trials", "max_iter", "stop_tol"},
                     "normalization_compare");
  NormalizationSpec spec;
  spec.problem = problem_spec_from_json(j.value("problem", Json::object()));
  spec.algorithms = algorithm_list(j);
  spec.trials = get_or<int>(j, "trials", 10);
  spec.settings = trial_settings(j);
  spec.master_seed = seed;
  spec.validate();
  return spec;
}

PhaseTransitionSpec parse_phase(const Json& j, std::uint64_t seed) {
  require_known_keys(j, {"experiment", "n", "m_grid", "trials_per_point", "signal", "algorithms",
                         "bisection_resolution", "max_iter", "stop_tol"},
                     "phase_transition");
  PhaseTransitionSpec spec;
  spec.n = get_or<Index>(j, "n", spec.n);
  if (j.contains("m_grid")) spec.m_grid = index_list(j, "m_grid");
  spec.trials_per_point = get_or<int>(j, "trials_per_point", spec.trials_per_point);
  spec.signal_dist = signal_dist_from_name(get_or<std::string>(j, "signal", "gaussian"));
  spec.algorithms = algorithm_list(j);
  spec.bisection_resolution = get_or<Index>(j, "bisection_resolution", 1);
  spec.settings = trial_settings(j);
  spec.master_seed = seed;
  spec.validate();
  return spec;
}

struct BoundExperimentSpec {
  CertifiedInstanceSpec instance;
  int instances = 5;
  std::string op = "hard";
  double scad_a = ThresholdingOperator::kDefaultScadA;
  BoundMode mode = BoundMode::gric;
  NormPair norms = NormPair::l2_l2();
  /// Numbers, or "near_lower" / "near_upper" for points just inside the
  /// certified interval.
  Json steps = Json::array({1.0});
  int max_iter = 200;
  double stop_tol = 1e-14;
  std::uint64_t budget = EnumerationBudget{}.max_supports;
  std::uint64_t master_seed = 0;
};

BoundExperimentSpec parse_bound(const Json& j, std::uint64_t seed) {
  require_known_keys(j, {"experiment", "instance", "instances", "operator", "scad_a", "mode",
                         "norms", "steps", "max_iter", "stop_tol", "budget"},
                     "convergence_bound");
  BoundExperimentSpec spec;
  const Json inst = j.value("instance", Json::object());
  require_known_keys(inst, {"n", "m", "k_star", "perturbation", "noise_sigma"}, "instance");
  spec.instance.n = get_or<Index>(inst, "n", spec.instance.n);
  spec.instance.m = get_or<Index>(inst, "m", spec.instance.n);
  spec.instance.k_star = get_or<Index>(inst, "k_star", spec.instance.k_star);
  spec.instance.perturbation = get_or<double>(inst, "perturbation", spec.instance.perturbation);
  spec.instance.noise_sigma = get_or<double>(inst, "noise_sigma", 0.0);
  spec.instance.validate();
  spec.instances = get_or<int>(j, "instances", spec.instances);
  if (spec.instances < 1) throw ConfigError("instances must be at least 1");
  spec.op = get_or<std::string>(j, "operator", spec.op);
  spec.scad_a = get_or<double>(j, "scad_a", spec.scad_a);
  ThresholdingOperator::from_name(spec.op, spec.scad_a);
  spec.mode = bound_mode_from_name(get_or<std::string>(j, "mode", "gric"));
  spec.norms = parse_norm_pair(get_or<std::string>(j, "norms", spec.norms.label()));
  if (j.contains("steps")) spec.steps = j.at("steps");
  if (!spec.steps.is_array() || spec.steps.empty()) throw ConfigError("steps must be a nonempty array");
  for (const auto& s : spec.steps) {
    const bool named = s.is_string() && (s == "near_lower" || s == "near_upper");
    if (!named && !s.is_number()) {
      throw ConfigError("each step must be a number, \"near_lower\" or \"near_upper\"");
    }
  }
  spec.max_iter = get_or<int>(j, "max_iter", spec.max_iter);
  spec.stop_tol = get_or<double>(j, "stop_tol", spec.stop_tol);
  spec.budget = get_or<std::uint64_t>(j, "budget", spec.budget);
  spec.master_seed = seed;
  return spec;
}

Json resolve(const SparsitySweepSpec& s, double threshold) {
  return {{"experiment", "sparsity_sweep"},
          {"problem", to_json(s.base)},
          {"k_values", s.k_values},
          {"algorithms", algorithm_labels(s.algorithms)},
          {"trials", s.trials},
          {"max_iter", s.settings.max_iter},
          {"stop_tol", s.settings.stop_tol},
          {"success_threshold", threshold}};
}

Json resolve(const NormalizationSpec& s) {
  return {{"experiment", "normalization_compare"},
          {"problem", to_json(s.problem)},
          {"algorithms", algorithm_labels(s.algorithms)},
          {"trials", s.trials},
          {"max_iter", s.settings.max_iter},
          {"stop_tol", s.settings.stop_tol}};
}

Json resolve(const PhaseTransitionSpec& s) {
  return {{"experiment", "phase_transition"},
          {"n", s.n},
          {"m_grid", s.m_grid},
          {"trials_per_point", s.trials_per_point},
          {"signal", std::string(signal_dist_name(s.signal_dist))},
          {"algorithms", algorithm_labels(s.algorithms)},
          {"bisection_resolution", s.bisection_resolution},
          {"max_iter", s.settings.max_iter},
          {"stop_tol", s.settings.stop_tol}};
}

Json resolve(const BoundExperimentSpec& s) {
  return {{"experiment", "convergence_bound"},
          {"instance",
           {{"n", s.instance.n},
            {"m", s.instance.m},
            {"k_star", s.instance.k_star},
            {"perturbation", s.instance.perturbation},
            {"noise_sigma", s.instance.noise_sigma}}},
          {"instances", s.instances},
          {"operator", s.op},
          {"scad_a", s.scad_a},
          {"mode", std::string(bound_mode_name(s.mode))},
          {"norms", s.norms.label()},
          {"steps", s.steps},
          {"max_iter", s.max_iter},
          {"stop_tol", s.stop_tol},
          {"budget", s.budget}};
}

std::string experiment_kind(const Json& j) {
  if (!j.is_object() || !j.contains("experiment") || !j.at("experiment").is_string()) {
    throw ConfigError("experiment spec needs a string field 'experiment'");
  }
  return j.at("experiment").get<std::string>();
}

Json resolve_experiment(const Json& raw, std::uint64_t seed) {
  const std::string kind = experiment_kind(raw);
  if (kind == "sparsity_sweep") {
    return resolve(parse_sweep(raw, seed), get_or<double>(raw, "success_threshold", 1e-10));
  }
  if (kind == "normalization_compare") return resolve(parse_normalization(raw, seed));
  if (kind == "phase_transition") return resolve(parse_phase(raw, seed));
  if (kind == "convergence_bound") return resolve(parse_bound(raw, seed));
  throw ConfigError("unknown experiment '" + kind +
                    "' (expected sparsity_sweep, normalization_compare, phase_transition or "
                    "convergence_bound)");
}

Outcome run_sweep(const Json& cfg, const Context& ctx, std::uint64_t seed) {
  const SparsitySweepSpec spec = parse_sweep(cfg, seed);
  const double threshold = get_or<double>(cfg, "success_threshold", 1e-10);
  const auto rows = sparsity_sweep(spec, ctx.jobs);
  const std::string stem = "sparsity_sweep_" + seed_tag(seed);
  write_sweep_csv(ctx.output_dir / (stem + ".csv"), rows);

  Json per_alg = Json::object();
  for (const auto& a : spec.algorithms) {
    const std::string label = a.label();
    const auto interval = feasible_interval(rows, label, threshold);
    Index last_failure_below_kstar = 0;
    bool all_below_fail = true;
    for (const auto& r : rows) {
      if (r.algorithm != label || r.k >= spec.base.k_star) continue;
      last_failure_below_kstar = std::max(last_failure_below_kstar, r.k);
      if (r.mean_precision <= threshold || r.success_rate > 0.0) all_below_fail = false;
    }
    per_alg[label] = {
        {"feasible_interval",
         interval ? Json::array({interval->first, interval->last}) : Json(nullptr)},
        {"width", interval ? Json(interval->width()) : Json(0)},
        {"all_fail_below_k_star", all_below_fail}};
  }
  write_json(ctx.output_dir / (stem + ".json"),
             {{"experiment", "sparsity_sweep"},
              {"seed", seed},
              {"k_star", spec.base.k_star},
              {"success_threshold", threshold},
              {"algorithms", per_alg}});
  return {{stem + ".csv", stem + ".json"}};
}

Outcome run_normalization(const Json& cfg, const Context& ctx, std::uint64_t seed) {
  const NormalizationSpec spec = parse_normalization(cfg, seed);
  const auto rows = normalization_compare(spec, ctx.jobs);
  const std::string stem = "normalization_compare_" + seed_tag(seed);
  write_normalization_csv(ctx.output_dir / (stem + ".csv"), rows);
  Json per_alg = Json::object();
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const double raw = rows[i].mean_precision;
    const double norm = rows[i + 1].mean_precision;
    per_alg[rows[i].algorithm] = {{"raw", raw},
                                  {"normalized", norm},
                                  {"ratio", raw > 0.0 && norm > 0.0
                                                ? Json(std::max(raw, norm) / std::min(raw, norm))
                                                : Json(nullptr)}};
  }
  write_json(ctx.output_dir / (stem + ".json"),
             {{"experiment", "normalization_compare"}, {"seed", seed}, {"algorithms", per_alg}});
  return {{stem + ".csv", stem + ".json"}};
}

Outcome run_phase(const Json& cfg, const Context& ctx, std::uint64_t seed) {
  const PhaseTransitionSpec spec = parse_phase(cfg, seed);
  const auto points = phase_transition(spec, ctx.jobs);
  const std::string stem = "phase_transition_" + seed_tag(seed);
  write_curve_csv(ctx.output_dir / (stem + ".csv"), points);
  Json curves = Json::object();
  for (const auto& p : points) {
    if (!curves.contains(p.algorithm)) curves[p.algorithm] = Json::array();
    Json evals = Json::array();
    for (const auto& [k, rate] : p.evaluations) evals.push_back({k, rate});
    curves[p.algorithm].push_back(
        {{"m", p.m}, {"m_over_n", p.m_over_n}, {"k_over_m", p.k_over_m}, {"evaluations", evals}});
  }
  write_json(ctx.output_dir / (stem + ".json"),
             {{"experiment", "phase_transition"},
              {"seed", seed},
              {"signal", std::string(signal_dist_name(spec.signal_dist))},
              {"curves", curves}});
  return {{stem + ".csv", stem + ".json"}};
}

Outcome run_bound(const Json& cfg, const Context& ctx, std::uint64_t seed) {
  const BoundExperimentSpec spec = parse_bound(cfg, seed);
  const ThresholdingOperator op = ThresholdingOperator::from_name(spec.op, spec.scad_a);
  const EnumerationBudget budget{spec.budget};
  std::vector<BoundRun> runs;
  Json summary = Json::array();
  bool all_hold = true;
  for (int i = 0; i < spec.instances; ++i) {
    CertifiedInstanceSpec inst = spec.instance;
    inst.seed = trial_seed(seed, static_cast<std::uint64_t>(i));
    const Problem problem = make_certified_instance(inst);
    BoundConfig bc;
    bc.mode = spec.mode;
    bc.norms = spec.norms;
    bc.max_iter = spec.max_iter;
    bc.stop_tol = spec.stop_tol;
    const BoundReport probe = verify_convergence_bound(problem, bc, op, budget);
    for (const auto& step : spec.steps) {
      if (step.is_string()) {
        if (spec.mode == BoundMode::golden) {
          throw ConfigError("the golden-ratio bound only admits step 1");
        }
        const double margin = 1e-3 * (probe.steps.hi - probe.steps.lo);
        bc.step = step == "near_lower" ? probe.steps.lo + margin : probe.steps.hi - margin;
      } else {
        bc.step = step.get<double>();
      }
      BoundRun run{inst.seed, verify_convergence_bound(problem, bc, op, budget)};
      all_hold = all_hold && run.report.holds();
      Json entry = to_json(run.report, false);
      entry["instance_seed"] = inst.seed;
      summary.push_back(entry);
      runs.push_back(std::move(run));
    }
  }
  const std::string stem = "convergence_bound_" + seed_tag(seed);
  write_bound_csv(ctx.output_dir / (stem + ".csv"), runs);
  write_json(ctx.output_dir / (stem + ".json"), {{"experiment", "convergence_bound"},
                                                 {"seed", seed},
                                                 {"operator", spec.op},
                                                 {"all_hold", all_hold},
                                                 {"runs", summary}});
  ctx.out << (all_hold ? "bound holds on every run\n" : "bound VIOLATED\n");
  return {{stem + ".csv", stem + ".json"}, all_hold ? kExitOk : kExitFailure};
}

Outcome exec_experiment(const Json& cfg, const Context& ctx) {
  const std::uint64_t seed = require_seed(ctx, "experiment");
  const std::string kind = experiment_kind(cfg);
  if (kind == "sparsity_sweep") return run_sweep(cfg, ctx, seed);
  if (kind == "normalization_compare") return run_normalization(cfg, ctx, seed);
  if (kind == "phase_transition") return run_phase(cfg, ctx, seed);
  if (kind == "convergence_bound") return run_bound(cfg, ctx, seed);
  throw ConfigError("unknown experiment '" + kind + "'");
}

StepStrategy parse_step(const std::string& text) {
  if (text == "adaptive") return StepStrategy::adaptive();
  double s = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), s);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("--step must be a positive number or 'adaptive'");
  }
  return StepStrategy::constant(s);
}

Outcome exec_solve(const Json& cfg, const Context& ctx) {
  const Matrix A = read_matrix(cfg.at("matrix").get<std::string>());
  const Vector b = read_vector(cfg.at("vector").get<std::string>());
  const ThresholdingOperator op =
      ThresholdingOperator::from_name(cfg.at("operator").get<std::string>(),
                                      cfg.at("scad_a").get<double>());
  SolverConfig config;
  config.k = cfg.at("k").get<Index>();
  config.step = parse_step(cfg.at("step").get<std::string>());
  config.max_iter = cfg.at("max_iter").get<int>();
  config.stop_tol = cfg.at("tol").get<double>();
  config.record_trace = true;
  if (!cfg.at("truth").is_null()) config.diagnostic_truth = read_vector(cfg.at("truth").get<std::string>());
  if (!cfg.at("x0").is_null()) config.x0 = read_vector(cfg.at("x0").get<std::string>());
  config.validate();

  const bool normalize = cfg.at("normalize").get<bool>();
  const SolveResult result =
      normalize ? solve_normalized(A, b, config, op) : solve(A, b, config, op);
  const std::string ext = cfg.at("format").get<std::string>() == "bin" ? ".bin" : ".csv";
  write_vector(ctx.output_dir / ("solution" + ext), result.x);
  write_trace_csv(ctx.output_dir / "trace.csv", result.trace);
  ctx.out << "status " << (result.status == SolveStatus::converged ? "converged" : "max_iter")
          << " after " << result.iterations << " iterations, residual "
          << format_double((b - A * result.x).norm()) << "\n";
  return {{"solution" + ext, "trace.csv"}};
}

Outcome exec_analyze(const Json& cfg, const Context& ctx) {
  const Matrix A = read_matrix(cfg.at("matrix").get<std::string>());
  const ThresholdingOperator op =
      ThresholdingOperator::from_name(cfg.at("operator").get<std::string>(),
                                      cfg.at("scad_a").get<double>());
  const NormPair norms = parse_norm_pair(cfg.at("norms").get<std::string>());
  const EnumerationBudget budget{cfg.at("budget").get<std::uint64_t>()};
  const int k_star = cfg.at("k_star").get<int>();
  if (k_star < 1) throw ConfigError("--k-star must be at least 1");
  const Json report = to_json(analyze(A, k_star, op, norms, budget));
  write_json(ctx.output_dir / "analysis.json", report);
  ctx.out << report.dump(2) << "\n";
  return {{"analysis.json"}};
}

Outcome exec_generate(const Json& cfg, const Context& ctx) {
  const std::uint64_t seed = require_seed(ctx, "generate");
  ProblemSpec spec = problem_spec_from_json(cfg.at("problem"));
  spec.seed = seed;
  const Problem p = generate(spec);
  const std::string ext = cfg.at("format").get<std::string>() == "bin" ? ".bin" : ".csv";
  const std::string tag = "_" + seed_tag(seed);
  std::vector<std::string> outputs{"A" + tag + ext, "b" + tag + ext, "x_star" + tag + ext,
                                   "epsilon" + tag + ext, "problem" + tag + ".json"};
  write_matrix(ctx.output_dir / outputs[0], p.A);
  write_vector(ctx.output_dir / outputs[1], p.b);
  write_vector(ctx.output_dir / outputs[2], p.x_star);
  write_vector(ctx.output_dir / outputs[3], p.epsilon);
  Json problem = to_json(spec);
  problem["seed"] = seed;
  problem["support"] = p.I_star;
  if (spec.snr_db && p.epsilon.norm() > 0.0) {
    problem["realized_snr_db"] = 20.0 * std::log10((p.A * p.x_star).norm() / p.epsilon.norm());
  }
  write_json(ctx.output_dir / outputs[4], problem);
  return {outputs};
}

Outcome dispatch(const std::string& command, const Json& cfg, const Context& ctx) {
  if (command == "solve") return exec_solve(cfg, ctx);
  if (command == "analyze") return exec_analyze(cfg, ctx);
  if (command == "generate") return exec_generate(cfg, ctx);
  if (command == "experiment") return exec_experiment(cfg, ctx);
  throw ConfigError("manifest names unknown command '" + command + "'");
}

int execute(const std::string& command, const Json& cfg, const Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(ctx.output_dir);
  const Outcome outcome = dispatch(command, cfg, ctx);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest;
  manifest["command"] = command;
  manifest["config"] = cfg;
  manifest["seed"] = ctx.seed ? Json(*ctx.seed) : Json(nullptr);
  manifest["version"] = AIT_VERSION;
  manifest["jobs"] = ctx.jobs;
  manifest["outputs"] = outcome.outputs;
  manifest["duration_seconds"] = seconds;
  write_json(ctx.output_dir / "manifest.json", manifest);
  return outcome.exit_code;
}

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

Json optional_path(const std::string& path) {
  return path.empty() ? Json(nullptr) : Json(absolute(path));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive iterative thresholding for sparse recovery", "ait"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AIT_VERSION);

  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string output_dir = ".";
  app.add_option("--seed", seed, "Master seed; every random draw derives from it");
  app.add_option("--jobs", jobs, "Worker threads for experiments")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "Directory for outputs and manifest.json");

  Json cfg;

  auto* solve_cmd = app.add_subcommand("solve", "Recover a sparse vector from A and b");
  solve_cmd->fallthrough();
  std::string matrix, vector, truth, x0, op_name = "hard", step = "1", format = "csv";
  Index k = 0;
  int max_iter = 2000;
  double tol = 1e-12, scad_a = ThresholdingOperator::kDefaultScadA;
  bool normalize = false;
  solve_cmd->add_option("--matrix", matrix, "Matrix file (.csv or .bin)")->required();
  solve_cmd->add_option("--vector", vector, "Observation vector file")->required();
  solve_cmd->add_option("--operator", op_name, "hard | soft | half | two_thirds | scad");
  solve_cmd->add_option("--scad-a", scad_a, "SCAD shape parameter (> 2)");
  solve_cmd->add_option("--k", k, "Sparsity level")->required();
  solve_cmd->add_option("--step", step, "Constant step size or 'adaptive'");
  solve_cmd->add_option("--max-iter", max_iter, "Iteration limit");
  solve_cmd->add_option("--tol", tol, "Relative iterate-change stopping tolerance");
  solve_cmd->add_flag("--normalize", normalize, "Solve on the column-normalized matrix");
  solve_cmd->add_option("--truth", truth, "Ground truth for error columns in the trace");
  solve_cmd->add_option("--x0", x0, "Starting point (default zero)");
  solve_cmd->add_option("--format", format, "Solution file format")
      ->check(CLI::IsMember({"csv", "bin"}));

  auto* analyze_cmd = app.add_subcommand("analyze", "Matrix constants and convergence conditions");
  analyze_cmd->fallthrough();
  std::string analyze_matrix, norms = "2,2", analyze_op = "hard";
  int k_star = 1;
  std::uint64_t budget = EnumerationBudget{}.max_supports;
  double analyze_scad_a = ThresholdingOperator::kDefaultScadA;
  analyze_cmd->add_option("--matrix", analyze_matrix, "Matrix file")->required();
  analyze_cmd->add_option("--k-star", k_star, "True sparsity")->required();
  analyze_cmd->add_option("--operator", analyze_op, "Operator whose constants enter L");
  analyze_cmd->add_option("--scad-a", analyze_scad_a, "SCAD shape parameter (> 2)");
  analyze_cmd->add_option("--norms", norms, "Norm pair p,q (e.g. 2,2 or 1,inf)");
  analyze_cmd->add_option("--budget", budget, "Maximum supports per enumeration");

  auto* generate_cmd = app.add_subcommand("generate", "Draw a random problem instance");
  generate_cmd->fallthrough();
  ProblemSpec gen;
  std::string signal = "gaussian", gen_format = "csv", snr_reference = "measurement";
  std::optional<double> snr_db, variance;
  generate_cmd->add_option("--m", gen.m, "Measurements");
  generate_cmd->add_option("--n", gen.n, "Signal length");
  generate_cmd->add_option("--k-star", gen.k_star, "Nonzeros in the signal");
  generate_cmd->add_option("--signal", signal, "gaussian | binary");
  generate_cmd->add_option("--snr-db", snr_db, "Noise level in decibels");
  generate_cmd->add_option("--snr-reference", snr_reference, "measurement | signal_entry");
  generate_cmd->add_option("--variance", variance, "Matrix entry variance (default 1/m)");
  generate_cmd->add_option("--format", gen_format, "csv | bin")
      ->check(CLI::IsMember({"csv", "bin"}));

  auto* experiment_cmd = app.add_subcommand("experiment", "Run an experiment from a JSON spec");
  experiment_cmd->fallthrough();
  std::string spec_path;
  experiment_cmd->add_option("spec", spec_path, "Experiment spec (JSON)")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->fallthrough();
  std::string manifest_path;
  replay_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx{seed, jobs, fs::path(output_dir), out};
  try {
    std::string command;
    if (*solve_cmd) {
      command = "solve";
      if (k < 1) throw ConfigError("--k must be at least 1");
      cfg = {{"matrix", absolute(matrix)},  {"vector", absolute(vector)},
             {"operator", op_name},         {"scad_a", scad_a},
             {"k", k},                      {"step", step},
             {"max_iter", max_iter},        {"tol", tol},
             {"normalize", normalize},      {"truth", optional_path(truth)},
             {"x0", optional_path(x0)},     {"format", format}};
      ThresholdingOperator::from_name(op_name, scad_a);
      parse_step(step);
    } else if (*analyze_cmd) {
      command = "analyze";
      if (k_star < 1) throw ConfigError("--k-star must be at least 1");
      cfg = {{"matrix", absolute(analyze_matrix)},
             {"k_star", k_star},
             {"operator", analyze_op},
             {"scad_a", analyze_scad_a},
             {"norms", parse_norm_pair(norms).label()},
             {"budget", budget}};
      ThresholdingOperator::from_name(analyze_op, analyze_scad_a);
    } else if (*generate_cmd) {
      command = "generate";
      require_seed(ctx, command);
      gen.signal_dist = signal_dist_from_name(signal);
      gen.snr_db = snr_db;
      gen.snr_reference = snr_reference_from_name(snr_reference);
      gen.matrix_variance = variance;
      gen.validate();
      cfg = {{"problem", to_json(gen)}, {"format", gen_format}};
    } else if (*experiment_cmd) {
      command = "experiment";
      cfg = resolve_experiment(read_json(spec_path), require_seed(ctx, command));
    } else {
      const Json manifest = read_json(manifest_path);
      if (!manifest.contains("command") || !manifest.contains("config")) {
        throw ConfigError(manifest_path + " is not a run manifest");
      }
      command = manifest.at("command").get<std::string>();
      cfg = manifest.at("config");
      if (manifest.contains("seed") && !manifest.at("seed").is_null()) {
        ctx.seed = manifest.at("seed").get<std::uint64_t>();
      }
    }
    return execute(command, cfg, ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ait
