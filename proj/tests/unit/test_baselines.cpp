#include <doctest.h>

#include <algorithm>
#include <set>

#include "ait/baselines.hpp"
#include "ait/probgen.hpp"

using namespace ait;

namespace {

// Identity plus a normalized all-ones column; coherence 1/sqrt(m).
Matrix low_coherence(Index m) {
  Matrix A(m, m + 1);
  A << Matrix::Identity(m, m), Vector::Constant(m, 1.0 / std::sqrt(double(m)));
  return A;
}

}  // namespace

TEST_CASE("identity matrix recovers any sparse vector") {
  Vector b = Vector::Zero(6);
  b[1] = 3.0;
  b[4] = -0.5;
  const auto r = omp_solve(Matrix::Identity(6, 6), b, {2, 0.0});
  CHECK(r.x == b);
  CHECK(r.support == Support{1, 4});
  CHECK(r.residual_norms.back() == 0.0);
  CHECK_FALSE(r.rank_deficient);
}

TEST_CASE("a single column is found in one step") {
  ProblemSpec spec;
  spec.m = 20;
  spec.n = 40;
  spec.k_star = 1;
  spec.seed = 2;
  const Problem p = generate(spec);
  const Vector b = p.A.col(17);
  const auto r = omp_solve(p.A, b, {5, 1e-12});
  CHECK(r.support == Support{17});
  CHECK(r.x[17] == doctest::Approx(1.0));
}

TEST_CASE("exact recovery under the coherence condition") {
  // m = 16 gives coherence 1/4 < 1/(2*2 - 1).
  const Matrix A = low_coherence(16);
  for (Index i : {0, 5, 16}) {
    for (Index j : {3, 9}) {
      Vector x = Vector::Zero(17);
      x[i] = 1.5;
      x[j] = -0.7;
      const auto r = omp_solve(A, A * x, {2, 0.0});
      CHECK((r.x - x).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("residuals are nonincreasing and indices never repeat") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProblemSpec spec;
    spec.m = 30;
    spec.n = 60;
    spec.k_star = 6;
    spec.snr_db = 20.0;
    spec.seed = seed;
    const Problem p = generate(spec);
    const auto r = omp_solve(p.A, p.b, {12, 0.0});
    CHECK(r.support.size() == 12);
    std::set<Index> unique(r.support.begin(), r.support.end());
    CHECK(unique.size() == r.support.size());
    for (std::size_t t = 1; t < r.residual_norms.size(); ++t) {
      CHECK(r.residual_norms[t] <= r.residual_norms[t - 1] * (1.0 + 1e-12));
    }
    CHECK(r.residual_norms.front() <= p.b.norm());
  }
}

TEST_CASE("noiseless Gaussian instance") {
  ProblemSpec spec;
  spec.m = 60;
  spec.n = 120;
  spec.k_star = 5;
  spec.seed = 11;
  const Problem p = generate(spec);
  const auto r = omp_solve(p.A, p.b, {5, 1e-10});
  CHECK(relative_error(r.x, p.x_star, ErrorNorm::l2) <= 1e-10);
}

TEST_CASE("residual tolerance stops early") {
  Vector b = Vector::Zero(4);
  b[2] = 1.0;
  const auto r = omp_solve(Matrix::Identity(4, 4), b, {4, 1e-9});
  CHECK(r.support.size() == 1);
}

TEST_CASE("rank deficient supports are flagged") {
  Matrix A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  Vector b(2);
  b << 1, 2;
  const auto r = omp_solve(A, b, {3, 0.0});
  CHECK(r.rank_deficient);
  CHECK((A * r.x - b).norm() <= 1e-12);
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(omp_solve(Matrix::Identity(3, 3), Vector::Ones(3), {0, 0.0}), ConfigError);
  CHECK_THROWS_AS(omp_solve(Matrix::Identity(3, 3), Vector::Ones(3), {1, -1.0}), ConfigError);
  CHECK_THROWS_AS(omp_solve(Matrix::Identity(3, 3), Vector::Ones(2), {1, 0.0}), DimensionError);
  Matrix z = Matrix::Identity(3, 3);
  z.col(1).setZero();
  CHECK_THROWS_AS(omp_solve(z, Vector::Ones(3), {1, 0.0}), DomainError);
}
