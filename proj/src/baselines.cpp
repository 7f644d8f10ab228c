#include "ait/baselines.hpp"

#include <algorithm>
#include <string>

namespace ait {

void OmpConfig::validate() const {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (!(residual_tol >= 0.0)) throw ConfigError("residual_tol must be nonnegative");
}

OmpResult omp_solve(const Matrix& A, const Vector& b, const OmpConfig& config) {
  config.validate();
  if (A.rows() != b.size()) throw DimensionError("A rows must match b length");
  const Vector col_norms = A.colwise().norm().transpose();
  for (Index j = 0; j < A.cols(); ++j) {
    if (!(col_norms[j] > 0.0)) {
      throw DomainError("column " + std::to_string(j) + " has zero norm");
    }
  }

  OmpResult out;
  out.x = Vector::Zero(A.cols());
  Vector residual = b;
  std::vector<bool> chosen(static_cast<std::size_t>(A.cols()), false);
  const Index rounds = std::min(config.k_max, A.cols());

  for (Index round = 0; round < rounds && residual.norm() > config.residual_tol; ++round) {
    const Vector corr = (A.transpose() * residual).cwiseAbs().cwiseQuotient(col_norms);
    Index best = -1;
    for (Index j = 0; j < A.cols(); ++j) {
      if (chosen[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || corr[j] > corr[best]) best = j;
    }
    if (best < 0) break;
    chosen[static_cast<std::size_t>(best)] = true;
    out.support.push_back(best);

    Matrix sub(A.rows(), static_cast<Index>(out.support.size()));
    for (std::size_t c = 0; c < out.support.size(); ++c) {
      sub.col(static_cast<Index>(c)) = A.col(out.support[c]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
    if (cod.rank() < sub.cols()) out.rank_deficient = true;
    const Vector coef = cod.solve(b);

    out.x.setZero();
    for (std::size_t c = 0; c < out.support.size(); ++c) {
      out.x[out.support[c]] = coef[static_cast<Index>(c)];
    }
    residual = b - sub * coef;
    out.residual_norms.push_back(residual.norm());
  }
  return out;
}

}  // namespace ait
