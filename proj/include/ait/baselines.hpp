#pragma once

#include "ait/types.hpp"

namespace ait {

struct OmpConfig {
  Index k_max = 1;
  double residual_tol = 0.0;
  void validate() const;
};

struct OmpResult {
  Vector x;
  /// Selection order, no repeats.
  Support support;
  /// Residual norm after each selection (nonincreasing).
  std::vector<double> residual_norms;
  /// Some support least-squares problem was rank deficient; the minimum-norm
  /// fit was used.
  bool rank_deficient = false;
};

/// Orthogonal matching pursuit: greedy column selection by residual
/// correlation (normalized by column norm), least-squares refit each round,
/// stopping after k_max selections or once the residual is at most residual_tol.
OmpResult omp_solve(const Matrix& A, const Vector& b, const OmpConfig& config);

}  // namespace ait
