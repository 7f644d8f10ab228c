#include "ait/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ait {

namespace {

void require_finite(const Matrix& A, const Vector& b) {
  if (!A.allFinite()) throw DomainError("measurement matrix has non-finite entries");
  if (!b.allFinite()) throw DomainError("observation vector has non-finite entries");
}

void require_shapes(const Matrix& A, const Vector& b, const Vector& x) {
  if (A.rows() != b.size() || A.cols() != x.size()) {
    throw DimensionError("shape mismatch: A is " + std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()) + ", b has " +
                         std::to_string(b.size()) + ", x has " +
                         std::to_string(x.size()));
  }
}

double norm_q(const Vector& v, double q) {
  if (std::isinf(q)) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (q == 1.0) return v.cwiseAbs().sum();
  if (q == 2.0) return v.norm();
  return std::pow(v.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

// Ordering by decreasing magnitude, ties to the lower index. A strict weak
// ordering, so nth_element yields a deterministic partition.
struct MagnitudeOrder {
  const Vector& z;
  bool operator()(Index a, Index b) const {
    const double ma = std::abs(z[a]);
    const double mb = std::abs(z[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  }
};

// ||g_I||^2 / ||A_I g_I||^2 with the degenerate-residual fallback to 1.
double normalised_step(const Matrix& A, const Vector& g, const Support& support) {
  double numerator = 0.0;
  Vector image = Vector::Zero(A.rows());
  for (Index i : support) {
    numerator += g[i] * g[i];
    image.noalias() += g[i] * A.col(i);
  }
  const double denominator = image.squaredNorm();
  if (denominator < 1e-14 * (numerator + 1.0)) return 1.0;
  return numerator / denominator;
}

}  // namespace

StepStrategy StepStrategy::constant(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ConfigError("constant step size must be a positive finite number");
  }
  return StepStrategy(false, s);
}

void SolverConfig::validate() const {
  if (k < 1) throw ConfigError("sparsity level k must be at least 1");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be nonnegative");
}

Vector gradient_step(const Matrix& A, const Vector& b, const Vector& x, double s) {
  require_shapes(A, b, x);
  return x - s * (A.transpose() * (A * x - b));
}

SupportSelection select_support_and_tau(const Vector& z, Index k) {
  if (k < 1) throw ConfigError("sparsity level k must be at least 1");
  const Index n = z.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  MagnitudeOrder cmp{z};

  SupportSelection out;
  if (k >= n) {
    out.support = std::move(order);
    out.tau = 0.0;
    return out;
  }
  std::nth_element(order.begin(), order.begin() + k, order.end(), cmp);
  out.tau = std::abs(z[order[static_cast<std::size_t>(k)]]);
  out.support.assign(order.begin(), order.begin() + k);
  std::sort(out.support.begin(), out.support.end());
  return out;
}

double adaptive_step(const Matrix& A, const Vector& b, const Vector& x,
                     const Support& support) {
  require_shapes(A, b, x);
  return normalised_step(A, A.transpose() * (b - A * x), support);
}

IterState initial_state(const Matrix& A, const Vector& b, const SolverConfig& config) {
  IterState state;
  state.x = config.x0 ? *config.x0 : Vector::Zero(A.cols());
  require_shapes(A, b, state.x);
  state.z = state.x;
  for (Index i = 0; i < state.x.size(); ++i) {
    if (state.x[i] != 0.0) state.support.push_back(i);
  }
  return state;
}

IterState ait_step(const IterState& state, const Matrix& A, const Vector& b,
                   const SolverConfig& config, const ThresholdingOperator& op) {
  require_shapes(A, b, state.x);
  const Vector g = A.transpose() * (b - A * state.x);

  double s = config.step.value();
  if (config.step.is_adaptive()) {
    // From a start with empty support the rule is evaluated on the k largest
    // gradient entries.
    const Support& active = state.support.empty()
                                ? select_support_and_tau(g, config.k).support
                                : state.support;
    s = normalised_step(A, g, active);
  }

  IterState next;
  next.z = state.x + s * g;
  next.step = s;
  next.t = state.t + 1;
  auto selection = select_support_and_tau(next.z, config.k);
  next.tau = selection.tau;
  next.support = std::move(selection.support);
  next.x = Vector::Zero(next.z.size());
  for (Index i : next.support) {
    const double zi = next.z[i];
    next.x[i] = next.tau == 0.0 ? zi : detail::defining_closed(op, zi, next.tau);
  }
  return next;
}

SolveResult solve(const Matrix& A, const Vector& b, const SolverConfig& config,
                  const ThresholdingOperator& op) {
  config.validate();
  require_finite(A, b);
  if (A.rows() != b.size()) throw DimensionError("A rows must match b length");
  if (config.diagnostic_truth && config.diagnostic_truth->size() != A.cols()) {
    throw DimensionError("diagnostic truth length must match A columns");
  }

  SolveResult result;
  IterState state = initial_state(A, b, config);
  for (int it = 0; it < config.max_iter; ++it) {
    IterState next = ait_step(state, A, b, config, op);
    const double change = (next.x - state.x).norm();
    const double scale = std::max(1.0, state.x.norm());

    if (config.record_trace) {
      TraceRecord rec;
      rec.t = next.t;
      rec.tau = next.tau;
      rec.support = next.support;
      rec.step = next.step;
      rec.residual_l2 = (b - A * next.x).norm();
      if (config.diagnostic_truth) {
        const Vector err = next.x - *config.diagnostic_truth;
        rec.error_norms = std::array<double, 3>{
            err.cwiseAbs().sum(), err.norm(),
            err.size() ? err.cwiseAbs().maxCoeff() : 0.0};
        rec.threshold_bound_holds = threshold_bound_holds(
            next, *config.diagnostic_truth, std::numeric_limits<double>::infinity());
      }
      result.trace.records.push_back(std::move(rec));
    }

    state = std::move(next);
    result.iterations = state.t;
    if (change <= config.stop_tol * scale) {
      result.status = SolveStatus::converged;
      break;
    }
  }
  result.x = std::move(state.x);
  return result;
}

NormalizedMatrix normalize_columns(const Matrix& A_raw) {
  NormalizedMatrix out;
  out.map.lambda_diag = A_raw.colwise().norm().transpose();
  for (Index j = 0; j < A_raw.cols(); ++j) {
    if (!(out.map.lambda_diag[j] > 0.0)) {
      throw DomainError("column " + std::to_string(j) + " has zero norm");
    }
  }
  out.A = A_raw * out.map.lambda_diag.cwiseInverse().asDiagonal();
  return out;
}

Vector denormalize_solution(const Vector& x_hat, const NormalizationMap& map) {
  if (x_hat.size() != map.lambda_diag.size()) {
    throw DimensionError("solution length must match normalization map");
  }
  return x_hat.cwiseQuotient(map.lambda_diag);
}

SolveResult solve_normalized(const Matrix& A_raw, const Vector& b,
                             const SolverConfig& config,
                             const ThresholdingOperator& op) {
  const NormalizedMatrix normalized = normalize_columns(A_raw);
  const Vector& lambda = normalized.map.lambda_diag;
  // Start point and truth move into the normalized frame (x_hat = Lambda x);
  // trace error norms are therefore reported in that frame.
  SolverConfig scaled = config;
  if (scaled.x0) scaled.x0 = scaled.x0->cwiseProduct(lambda);
  if (scaled.diagnostic_truth) {
    scaled.diagnostic_truth = scaled.diagnostic_truth->cwiseProduct(lambda);
  }
  SolveResult result = solve(normalized.A, b, scaled, op);
  result.x = denormalize_solution(result.x, normalized.map);
  return result;
}

bool threshold_bound_holds(const IterState& state, const Vector& truth, double q) {
  if (truth.size() != state.z.size()) {
    throw DimensionError("truth length must match iterate length");
  }
  const Index top = static_cast<Index>(state.support.size()) + 1;
  const Support extended = select_support_and_tau(state.z, top).support;
  Vector diff(static_cast<Index>(extended.size()));
  for (std::size_t i = 0; i < extended.size(); ++i) {
    diff[static_cast<Index>(i)] = state.z[extended[i]] - truth[extended[i]];
  }
  return state.tau <= norm_q(diff, q);
}

}  // namespace ait
