#pragma once

#include <array>
#include <optional>

#include "ait/thresholding.hpp"
#include "ait/types.hpp"

namespace ait {

/// Constant step s > 0, or the adaptive (normalised) rule recomputed from the
/// current iterate at every iteration.
class StepStrategy {
 public:
  static StepStrategy constant(double s);
  static StepStrategy adaptive() { return StepStrategy(true, 0.0); }

  bool is_adaptive() const { return adaptive_; }
  /// Constant step size; 0 for the adaptive rule.
  double value() const { return value_; }

 private:
  StepStrategy(bool adaptive, double value) : adaptive_(adaptive), value_(value) {}
  bool adaptive_;
  double value_;
};

struct SolverConfig {
  Index k = 1;
  StepStrategy step = StepStrategy::constant(1.0);
  int max_iter = 2000;
  double stop_tol = 1e-12;
  bool record_trace = false;
  /// Enables error norms and the threshold-bound diagnostic in the trace.
  std::optional<Vector> diagnostic_truth;
  /// Starting point; zero when absent.
  std::optional<Vector> x0;

  /// Throws ConfigError on k < 1, max_iter < 1, non-positive constant step or
  /// negative tolerance.
  void validate() const;
};

struct IterState {
  Vector x;
  Vector z;
  double tau = 0.0;
  Support support;
  int t = 0;
  /// Step size that produced z (0 for the initial state).
  double step = 0.0;
};

struct TraceRecord {
  int t = 0;
  double tau = 0.0;
  Support support;
  double step = 0.0;
  double residual_l2 = 0.0;
  /// ||x_t - truth|| in l1, l2, linf when a truth vector is configured.
  std::optional<std::array<double, 3>> error_norms;
  /// tau_t <= max_{i in top k+1} |z_i - truth_i| when a truth vector is configured.
  std::optional<bool> threshold_bound_holds;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
};

enum class SolveStatus { converged, max_iter };

struct SolveResult {
  Vector x;
  SolveTrace trace;
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
};

/// Column norms of the raw matrix (the diagonal of the scaling Lambda).
struct NormalizationMap {
  Vector lambda_diag;
};

struct NormalizedMatrix {
  Matrix A;
  NormalizationMap map;
};

/// x - s A^T (A x - b).
Vector gradient_step(const Matrix& A, const Vector& b, const Vector& x, double s);

struct SupportSelection {
  Support support;
  double tau = 0.0;
};

/// Indices of the k largest magnitudes of z (ties to the lower index) and the
/// (k+1)-th largest magnitude, or 0 when k + 1 > n.
SupportSelection select_support_and_tau(const Vector& z, Index k);

/// ||g_I||^2 / ||A_I g_I||^2 with g = A^T (b - A x); 1 when the denominator
/// vanishes relative to the numerator.
double adaptive_step(const Matrix& A, const Vector& b, const Vector& x,
                     const Support& support);

IterState initial_state(const Matrix& A, const Vector& b, const SolverConfig& config);

/// One gradient / select / threshold round.
IterState ait_step(const IterState& state, const Matrix& A, const Vector& b,
                   const SolverConfig& config, const ThresholdingOperator& op);

SolveResult solve(const Matrix& A, const Vector& b, const SolverConfig& config,
                  const ThresholdingOperator& op);

NormalizedMatrix normalize_columns(const Matrix& A_raw);

Vector denormalize_solution(const Vector& x_hat, const NormalizationMap& map);

/// Normalizes A, solves in the normalized frame, maps the result back.
SolveResult solve_normalized(const Matrix& A_raw, const Vector& b,
                             const SolverConfig& config,
                             const ThresholdingOperator& op);

/// tau <= ||(z - truth)_{I+}||_q, with I+ the k+1 largest magnitudes of z.
/// q may be +infinity.
bool threshold_bound_holds(const IterState& state, const Vector& truth, double q);

}  // namespace ait
