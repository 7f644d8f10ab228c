#include "ait/experiments.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "ait/parallel.hpp"
#include "ait/rng.hpp"

namespace ait {

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Same instance per (m, k, trial) for every algorithm.
std::uint64_t phase_seed(std::uint64_t master, Index m, Index k, int trial) {
  return derive_seed(derive_seed(derive_seed(master, static_cast<std::uint64_t>(m)),
                                 static_cast<std::uint64_t>(k)),
                     static_cast<std::uint64_t>(trial));
}

void validate_algorithms(const std::vector<Algorithm>& algorithms) {
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
}

void require_unit_columns(const Matrix& A) {
  for (Index j = 0; j < A.cols(); ++j) {
    if (std::abs(A.col(j).norm() - 1.0) > 1e-10) {
      throw HypothesisError("bound verification needs unit-norm columns");
    }
  }
}

}  // namespace

Algorithm Algorithm::parse(std::string_view text) {
  std::string_view name = text;
  std::optional<double> constant;
  bool adaptive = false;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    name = text.substr(0, at);
    const std::string_view step = text.substr(at + 1);
    double s = 0.0;
    const auto res = std::from_chars(step.data(), step.data() + step.size(), s);
    if (res.ec != std::errc() || res.ptr != step.data() + step.size()) {
      throw ConfigError("bad step in algorithm '" + std::string(text) + "'");
    }
    constant = s;
  } else if (name.size() > 1 && name.front() == 'n') {
    name.remove_prefix(1);
    adaptive = true;
  }
  const ThresholdingOperator op = ThresholdingOperator::from_name(name);
  if (adaptive) return {op, StepStrategy::adaptive()};
  return {op, StepStrategy::constant(constant.value_or(1.0))};
}

std::string Algorithm::label() const {
  const std::string name(op.name());
  if (step.is_adaptive()) return "n" + name;
  if (step.value() == 1.0) return name;
  return name + "@" + format_number(step.value());
}

std::vector<Algorithm> default_algorithms() {
  std::vector<Algorithm> out;
  for (const char* text : {"hard", "soft", "half", "scad", "nhard", "nsoft", "nhalf", "nscad"}) {
    out.push_back(Algorithm::parse(text));
  }
  return out;
}

TrialResult run_trial(const Problem& problem, const Algorithm& algorithm,
                      const TrialSettings& settings, bool normalize,
                      std::optional<Index> k_override) {
  SolverConfig config;
  config.k = k_override.value_or(static_cast<Index>(problem.I_star.size()));
  config.step = algorithm.step;
  config.max_iter = settings.max_iter;
  config.stop_tol = settings.stop_tol;
  const SolveResult result = normalize
                                 ? solve_normalized(problem.A, problem.b, config, algorithm.op)
                                 : solve(problem.A, problem.b, config, algorithm.op);
  TrialResult out;
  out.precision = relative_error(result.x, problem.x_star, ErrorNorm::l2);
  out.success = is_success(result.x, problem.x_star);
  out.iterations = result.iterations;
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  return derive_seed(master_seed, trial);
}

void SparsitySweepSpec::validate() const {
  base.validate();
  if (k_values.empty()) throw ConfigError("k_values must be nonempty");
  for (Index k : k_values) {
    if (k < 1) throw ConfigError("every k must be at least 1");
  }
  validate_algorithms(algorithms);
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

std::vector<SweepRow> sparsity_sweep(const SparsitySweepSpec& spec, int jobs) {
  spec.validate();
  const auto trials = static_cast<std::size_t>(spec.trials);
  std::vector<Problem> problems(trials);
  parallel_for(trials, jobs, [&](std::size_t j) {
    ProblemSpec ps = spec.base;
    ps.seed = trial_seed(spec.master_seed, j);
    problems[j] = generate(ps);
  });

  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_k = spec.k_values.size();
  std::vector<TrialResult> results(n_alg * n_k * trials);
  parallel_for(results.size(), jobs, [&](std::size_t idx) {
    const std::size_t j = idx % trials;
    const std::size_t ki = (idx / trials) % n_k;
    const std::size_t a = idx / (trials * n_k);
    results[idx] = run_trial(problems[j], spec.algorithms[a], spec.settings, false,
                             spec.k_values[ki]);
  });

  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < n_alg; ++a) {
    for (std::size_t ki = 0; ki < n_k; ++ki) {
      SweepRow row;
      row.algorithm = spec.algorithms[a].label();
      row.k = spec.k_values[ki];
      for (std::size_t j = 0; j < trials; ++j) {
        const TrialResult& r = results[(a * n_k + ki) * trials + j];
        row.mean_precision += r.precision;
        row.success_rate += r.success ? 1.0 : 0.0;
        row.mean_iterations += r.iterations;
      }
      row.mean_precision /= static_cast<double>(trials);
      row.success_rate /= static_cast<double>(trials);
      row.mean_iterations /= static_cast<double>(trials);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::optional<FeasibleInterval> feasible_interval(const std::vector<SweepRow>& rows,
                                                  const std::string& algorithm,
                                                  double threshold) {
  std::optional<FeasibleInterval> out;
  for (const auto& row : rows) {
    if (row.algorithm != algorithm) continue;
    const bool ok = row.mean_precision <= threshold;
    if (!out) {
      if (ok) out = FeasibleInterval{row.k, row.k};
    } else if (ok) {
      out->last = row.k;
    } else {
      break;
    }
  }
  return out;
}

void NormalizationSpec::validate() const {
  problem.validate();
  validate_algorithms(algorithms);
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

std::vector<NormalizationRow> normalization_compare(const NormalizationSpec& spec, int jobs) {
  spec.validate();
  const auto trials = static_cast<std::size_t>(spec.trials);
  std::vector<Problem> problems(trials);
  parallel_for(trials, jobs, [&](std::size_t j) {
    ProblemSpec ps = spec.problem;
    ps.seed = trial_seed(spec.master_seed, j);
    problems[j] = generate(ps);
  });

  const std::size_t n_alg = spec.algorithms.size();
  std::vector<TrialResult> results(n_alg * 2 * trials);
  parallel_for(results.size(), jobs, [&](std::size_t idx) {
    const std::size_t j = idx % trials;
    const bool normalized = (idx / trials) % 2 == 1;
    const std::size_t a = idx / (2 * trials);
    results[idx] = run_trial(problems[j], spec.algorithms[a], spec.settings, normalized);
  });

  std::vector<NormalizationRow> rows;
  for (std::size_t a = 0; a < n_alg; ++a) {
    for (int path = 0; path < 2; ++path) {
      NormalizationRow row;
      row.algorithm = spec.algorithms[a].label();
      row.normalized = path == 1;
      for (std::size_t j = 0; j < trials; ++j) {
        const TrialResult& r = results[(a * 2 + static_cast<std::size_t>(path)) * trials + j];
        row.mean_precision += r.precision;
        row.success_rate += r.success ? 1.0 : 0.0;
        row.mean_iterations += r.iterations;
      }
      row.mean_precision /= static_cast<double>(trials);
      row.success_rate /= static_cast<double>(trials);
      row.mean_iterations /= static_cast<double>(trials);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void PhaseTransitionSpec::validate() const {
  if (n < 1) throw ConfigError("n must be positive");
  if (m_grid.empty()) throw ConfigError("m_grid must be nonempty");
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] < 1 || m_grid[i] > n) throw ConfigError("every m must lie in [1, n]");
    if (i > 0 && m_grid[i] <= m_grid[i - 1]) throw ConfigError("m_grid must be increasing");
  }
  if (trials_per_point < 1) throw ConfigError("trials_per_point must be at least 1");
  if (bisection_resolution < 1) throw ConfigError("bisection_resolution must be at least 1");
  validate_algorithms(algorithms);
}

double phase_success_rate(const PhaseTransitionSpec& spec, const Algorithm& algorithm,
                          Index m, Index k) {
  int successes = 0;
  for (int j = 0; j < spec.trials_per_point; ++j) {
    ProblemSpec ps;
    ps.m = m;
    ps.n = spec.n;
    ps.k_star = k;
    ps.signal_dist = spec.signal_dist;
    ps.seed = phase_seed(spec.master_seed, m, k, j);
    if (run_trial(generate(ps), algorithm, spec.settings).success) ++successes;
  }
  return static_cast<double>(successes) / spec.trials_per_point;
}

std::vector<CurvePoint> phase_transition(const PhaseTransitionSpec& spec, int jobs) {
  spec.validate();
  const std::size_t n_m = spec.m_grid.size();
  std::vector<CurvePoint> points(spec.algorithms.size() * n_m);
  parallel_for(points.size(), jobs, [&](std::size_t idx) {
    const Algorithm& algorithm = spec.algorithms[idx / n_m];
    const Index m = spec.m_grid[idx % n_m];
    CurvePoint& point = points[idx];
    point.algorithm = algorithm.label();
    point.m = m;
    point.n = spec.n;

    // lo: last k known to succeed (0 is vacuous); hi: first k known to fail
    // (m + 1 is vacuous).
    Index lo = 0;
    Index hi = m + 1;
    double rate_lo = 1.0;
    std::optional<double> rate_hi;
    while (hi - lo > spec.bisection_resolution) {
      const Index mid = lo + (hi - lo) / 2;
      const double rate = phase_success_rate(spec, algorithm, m, mid);
      point.evaluations.emplace_back(mid, rate);
      if (rate >= 0.5) {
        lo = mid;
        rate_lo = rate;
      } else {
        hi = mid;
        rate_hi = rate;
      }
    }
    point.k = lo;
    point.success_rate_at_k = lo == 0 ? 0.0 : rate_lo;
    if (rate_hi) {
      point.k_fail = hi;
      point.success_rate_at_fail = rate_hi;
    }
    point.m_over_n = static_cast<double>(m) / static_cast<double>(spec.n);
    point.k_over_m = static_cast<double>(lo) / static_cast<double>(m);
  });
  return points;
}

void CertifiedInstanceSpec::validate() const {
  if (n < 1 || m < n) throw ConfigError("certified instances need m >= n >= 1");
  if (k_star < 1 || k_star > n) throw ConfigError("k_star must lie in [1, n]");
  if (!(perturbation >= 0.0)) throw ConfigError("perturbation must be nonnegative");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be nonnegative");
}

Problem make_certified_instance(const CertifiedInstanceSpec& spec) {
  spec.validate();
  CounterRng matrix_rng(derive_seed(spec.seed, 0));
  Matrix A = Matrix::Zero(spec.m, spec.n);
  A.topRows(spec.n).setIdentity();
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) A(i, j) += spec.perturbation * matrix_rng.normal();
  }
  Problem p;
  p.A = normalize_columns(A).A;

  CounterRng support_rng(derive_seed(spec.seed, 1));
  std::vector<Index> perm(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < spec.k_star; ++i) {
    const auto j = i + static_cast<Index>(
                           support_rng.below(static_cast<std::uint64_t>(spec.n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  p.I_star.assign(perm.begin(), perm.begin() + spec.k_star);
  std::sort(p.I_star.begin(), p.I_star.end());

  CounterRng value_rng(derive_seed(spec.seed, 2));
  p.x_star = Vector::Zero(spec.n);
  for (Index i : p.I_star) {
    double v = 0.0;
    do {
      v = value_rng.normal();
    } while (v == 0.0);
    p.x_star[i] = v;
  }

  CounterRng noise_rng(derive_seed(spec.seed, 3));
  p.epsilon = Vector::Zero(spec.m);
  if (spec.noise_sigma > 0.0) {
    for (Index i = 0; i < spec.m; ++i) p.epsilon[i] = spec.noise_sigma * noise_rng.normal();
  }
  p.b = p.A * p.x_star + p.epsilon;
  return p;
}

BoundMode bound_mode_from_name(std::string_view name) {
  if (name == "gric") return BoundMode::gric;
  if (name == "coherence") return BoundMode::coherence;
  if (name == "golden") return BoundMode::golden;
  throw ConfigError("unknown bound mode '" + std::string(name) +
                    "' (expected gric, coherence or golden)");
}

std::string_view bound_mode_name(BoundMode mode) {
  switch (mode) {
    case BoundMode::gric:
      return "gric";
    case BoundMode::coherence:
      return "coherence";
    case BoundMode::golden:
      return "golden";
  }
  return "gric";
}

BoundReport verify_convergence_bound(const Problem& problem, const BoundConfig& config,
                                     const ThresholdingOperator& op,
                                     const EnumerationBudget& budget) {
  const Matrix& A = problem.A;
  require_unit_columns(A);
  const auto k_star = static_cast<int>(problem.I_star.size());
  if (k_star < 1) throw HypothesisError("the true signal must be nonzero");
  const Vector atn = A.transpose() * problem.epsilon;
  const double s = config.step;
  const Index level = 3 * static_cast<Index>(k_star) + 1;

  BoundReport report;
  report.mode = config.mode;
  report.k_star = k_star;
  report.step = s;

  switch (config.mode) {
    case BoundMode::gric: {
      report.norms = config.norms;
      const GricValue beta = gric(A, level, config.norms, budget);
      if (!beta.exact) {
        throw HypothesisError("the constant at norm pair " + config.norms.label() +
                              " is not exactly computable; use 1,inf or 2,2");
      }
      report.constant = beta.value;
      report.L = contraction_constants(k_star, config.norms, op.c1(), op.c2()).L;
      report.steps = step_interval(k_star, config.norms, beta.value, report.L);
      report.rho = convergence_rate(s, k_star, config.norms, beta.value, report.L).rho;
      break;
    }
    case BoundMode::coherence: {
      report.norms = NormPair::l1_linf();
      report.constant = coherence(A);
      if (!(report.constant < 1.0 / ((3.0 - op.c2()) * k_star))) {
        throw HypothesisError("coherence is not below 1/((3 - c2) k*)");
      }
      report.L = contraction_constants(k_star, report.norms, op.c1(), op.c2()).L;
      report.steps = coherence_step_interval(report.constant, report.L);
      report.rho = coherence_rate(s, report.constant, report.L).rho;
      break;
    }
    case BoundMode::golden: {
      report.norms = NormPair::l2_l2();
      if (op.kind() != OperatorKind::hard) {
        throw HypothesisError("the golden-ratio bound applies to hard thresholding only");
      }
      if (s != 1.0) throw HypothesisError("the golden-ratio bound needs step 1");
      report.constant = ric(A, level, budget);
      if (!(report.constant < kGoldenThreshold)) {
        throw HypothesisError("delta is not below (sqrt 5 - 1)/2");
      }
      report.L = 1.0;
      report.steps = {1.0, 1.0};
      report.rho = hard_golden_rate(report.constant);
      break;
    }
  }
  if (config.mode != BoundMode::golden && !report.steps.contains(s)) {
    throw HypothesisError("step " + format_number(s) + " lies outside (" +
                          format_number(report.steps.lo) + ", " +
                          format_number(report.steps.hi) + ")");
  }

  const double p = report.norms.p();
  if (config.mode == BoundMode::golden) {
    report.noise_term = (std::sqrt(5.0) + 1.0) / (2.0 - 2.0 * report.rho) * atn.norm();
  } else {
    report.noise_term = s * report.L / (1.0 - report.rho) * lp_norm(atn, report.norms.q());
  }

  SolverConfig solver;
  solver.k = k_star;
  solver.step = StepStrategy::constant(s);
  solver.max_iter = config.max_iter;
  solver.stop_tol = config.stop_tol;
  IterState state = initial_state(A, problem.b, solver);
  const double initial_error = lp_norm(problem.x_star - state.x, p);
  const double slack = 1e-12 * std::max(1.0, lp_norm(problem.x_star, p));

  bool converged = false;
  for (int t = 0;; ++t) {
    BoundRow row;
    row.t = t;
    row.error = lp_norm(state.x - problem.x_star, p);
    row.bound = std::pow(report.rho, t) * initial_error + report.noise_term;
    if (row.error > row.bound + slack) ++report.violations;
    report.rows.push_back(row);
    if (converged || t == config.max_iter) break;
    IterState next = ait_step(state, A, problem.b, solver, op);
    const double change = (next.x - state.x).norm();
    converged = change <= config.stop_tol * std::max(1.0, state.x.norm());
    state = std::move(next);
  }
  return report;
}

}  // namespace ait
