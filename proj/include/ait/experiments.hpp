#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ait/analysis.hpp"
#include "ait/probgen.hpp"
#include "ait/solver.hpp"
#include "ait/thresholding.hpp"

namespace ait {

/// A thresholding operator paired with a step rule.
struct Algorithm {
  ThresholdingOperator op;
  StepStrategy step;

  /// "hard" (s = 1), "nhard" (adaptive step) or "hard@0.9" (constant 0.9);
  /// any operator name works in place of hard.
  static Algorithm parse(std::string_view text);
  /// Inverse of parse.
  std::string label() const;
};

/// The four operators with unit step followed by their adaptive-step versions.
std::vector<Algorithm> default_algorithms();

/// Iteration limits shared by every trial of an experiment.
struct TrialSettings {
  int max_iter = 2000;
  double stop_tol = 1e-12;
};

struct TrialResult {
  bool success = false;
  /// Relative l2 error.
  double precision = 0.0;
  int iterations = 0;
};

/// Solves with k = |I_star| (or k_override) and scores against x_star.
TrialResult run_trial(const Problem& problem, const Algorithm& algorithm,
                      const TrialSettings& settings, bool normalize = false,
                      std::optional<Index> k_override = std::nullopt);

/// Seed of trial j under a master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

struct SparsitySweepSpec {
  ProblemSpec base;
  std::vector<Index> k_values;
  std::vector<Algorithm> algorithms;
  int trials = 1;
  std::uint64_t master_seed = 0;
  TrialSettings settings;
  void validate() const;
};

struct SweepRow {
  std::string algorithm;
  Index k = 0;
  double mean_precision = 0.0;
  double success_rate = 0.0;
  double mean_iterations = 0.0;
};

/// Every algorithm and every k runs on the same trial instances. Rows are
/// ordered by algorithm, then k.
std::vector<SweepRow> sparsity_sweep(const SparsitySweepSpec& spec, int jobs = 1);

struct FeasibleInterval {
  Index first = 0;
  Index last = 0;
  Index width() const { return last - first + 1; }
};

/// The first k (in sweep order) whose mean precision is at most `threshold`,
/// extended over the following rows while they stay at or below it.
std::optional<FeasibleInterval> feasible_interval(const std::vector<SweepRow>& rows,
                                                  const std::string& algorithm,
                                                  double threshold);

struct NormalizationSpec {
  ProblemSpec problem;
  std::vector<Algorithm> algorithms;
  int trials = 10;
  std::uint64_t master_seed = 0;
  TrialSettings settings;
  void validate() const;
};

struct NormalizationRow {
  std::string algorithm;
  bool normalized = false;
  double mean_precision = 0.0;
  double success_rate = 0.0;
  double mean_iterations = 0.0;
};

/// Raw-matrix and normalize/solve/denormalize paths on the same instances.
/// Rows are ordered by algorithm, raw path first.
std::vector<NormalizationRow> normalization_compare(const NormalizationSpec& spec,
                                                    int jobs = 1);

struct PhaseTransitionSpec {
  Index n = 128;
  std::vector<Index> m_grid{16, 32, 48, 64, 80, 96, 112, 128};
  int trials_per_point = 20;
  SignalDist signal_dist = SignalDist::gaussian;
  std::vector<Algorithm> algorithms = default_algorithms();
  Index bisection_resolution = 1;
  std::uint64_t master_seed = 0;
  TrialSettings settings;
  void validate() const;
};

struct CurvePoint {
  std::string algorithm;
  Index m = 0;
  Index n = 0;
  /// Largest k found with success rate >= 0.5 (0 when k = 1 already fails).
  Index k = 0;
  double m_over_n = 0.0;
  double k_over_m = 0.0;
  double success_rate_at_k = 0.0;
  /// Smallest evaluated k above `k` with success rate < 0.5; absent when
  /// every k up to m succeeded.
  std::optional<Index> k_fail;
  std::optional<double> success_rate_at_fail;
  /// Every (k, success rate) the bisection evaluated, in evaluation order.
  std::vector<std::pair<Index, double>> evaluations;
};

/// Per (algorithm, m), bisection over k in [1, m] for the last k with at least
/// 50% empirical success. Instances at (m, k, trial) are shared by all
/// algorithms. Points are ordered by algorithm, then m.
std::vector<CurvePoint> phase_transition(const PhaseTransitionSpec& spec, int jobs = 1);

/// Empirical success rate of one algorithm at (m, k) under the phase-transition
/// seeding.
double phase_success_rate(const PhaseTransitionSpec& spec, const Algorithm& algorithm,
                          Index m, Index k);

struct CertifiedInstanceSpec {
  Index n = 8;
  Index m = 8;
  Index k_star = 1;
  /// Scale of the Gaussian perturbation added to [I; 0] before normalization.
  double perturbation = 0.05;
  /// Standard deviation of the measurement noise (0 for noiseless).
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Unit-column matrix close to [I; 0] with a k*-sparse Gaussian signal. Small
/// enough that the restricted isometry constants are exactly enumerable.
Problem make_certified_instance(const CertifiedInstanceSpec& spec);

enum class BoundMode {
  /// Generic rate rho = gamma_s L at a norm pair with an exact gRIC constant.
  gric,
  /// l1 / linf form with gamma_s = max(|1 - s|, s mu).
  coherence,
  /// Hard thresholding at s = 1 with rho = ((sqrt 5 + 1)/2) delta.
  golden,
};

BoundMode bound_mode_from_name(std::string_view name);
std::string_view bound_mode_name(BoundMode mode);

struct BoundConfig {
  BoundMode mode = BoundMode::gric;
  NormPair norms = NormPair::l2_l2();
  double step = 1.0;
  int max_iter = 200;
  double stop_tol = 1e-14;
};

struct BoundRow {
  int t = 0;
  double error = 0.0;
  double bound = 0.0;
};

struct BoundReport {
  BoundMode mode = BoundMode::gric;
  NormPair norms = NormPair::l2_l2();
  Index k_star = 0;
  double step = 1.0;
  /// The certified constant: beta, mu or delta depending on the mode.
  double constant = 0.0;
  double L = 0.0;
  double rho = 0.0;
  /// Admissible step interval of the mode (golden: the single point 1).
  StepInterval steps;
  double noise_term = 0.0;
  std::vector<BoundRow> rows;
  int violations = 0;
  bool holds() const { return violations == 0; }
};

/// Certifies the mode's hypothesis on problem.A (unit columns, exactly computed
/// constants, admissible step), runs the iteration with k = |I_star| from
/// x = 0, and checks the error bound at every iterate with absolute slack
/// 1e-12 * max(1, ||x*||_p). Throws HypothesisError when the hypothesis cannot
/// be certified.
BoundReport verify_convergence_bound(const Problem& problem, const BoundConfig& config,
                                     const ThresholdingOperator& op,
                                     const EnumerationBudget& budget = {});

}  // namespace ait
