#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ait/thresholding.hpp"

using namespace ait;

namespace {

// Larger root of x + alpha * x^(-r) = u, by bisection on the increasing branch.
double larger_root(double u, double alpha, double r) {
  double lo = std::pow(r * alpha, 1.0 / (1.0 + r));
  double hi = u;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid + alpha * std::pow(mid, -r) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Stationarity of (x - u)^2 + lambda |x|^(1/2) with the jump placed at tau.
double half_oracle(double u, double tau) {
  const double lambda = 8.0 * std::pow(tau, 1.5) / std::sqrt(54.0);
  return larger_root(u, lambda / 4.0, 0.5);
}

// Stationarity of (x - u)^2 + lambda |x|^(2/3) with the jump placed at tau.
double two_thirds_oracle(double u, double tau) {
  const double lambda = std::cbrt(27.0 * std::pow(tau, 4.0) / 16.0);
  return larger_root(u, lambda / 3.0, 1.0 / 3.0);
}

std::vector<ThresholdingOperator> all_operators() {
  return {ThresholdingOperator::hard(), ThresholdingOperator::soft(),
          ThresholdingOperator::half(), ThresholdingOperator::two_thirds(),
          ThresholdingOperator::scad()};
}

}  // namespace

TEST_CASE("declared boundedness constants") {
  CHECK(ThresholdingOperator::hard().c1() == 0.0);
  CHECK(ThresholdingOperator::hard().c2() == 0.0);
  CHECK(ThresholdingOperator::soft().c1() == 1.0);
  CHECK(ThresholdingOperator::soft().c2() == 1.0);
  CHECK(ThresholdingOperator::half().c1() == doctest::Approx(1.0 / 3.0));
  CHECK(ThresholdingOperator::half().c2() == 0.0);
  CHECK(ThresholdingOperator::two_thirds().c1() == 0.5);
  CHECK(ThresholdingOperator::two_thirds().c2() == 0.0);
  CHECK(ThresholdingOperator::scad().c1() == 1.0);
  CHECK(ThresholdingOperator::scad().c2() == 0.0);
  CHECK(ThresholdingOperator::scad().scad_a() == 3.7);
  for (const auto& op : all_operators()) {
    CHECK(0.0 <= op.c2());
    CHECK(op.c2() <= op.c1());
    CHECK(op.c1() <= 1.0);
  }
}

TEST_CASE("operator names") {
  for (const char* name : {"hard", "soft", "half", "two_thirds", "scad"}) {
    CHECK(ThresholdingOperator::from_name(name).name() == name);
  }
  CHECK(ThresholdingOperator::from_name("scad", 5.0).scad_a() == 5.0);
  CHECK_THROWS_AS(ThresholdingOperator::from_name("mcp"), ConfigError);
  CHECK_THROWS_AS(ThresholdingOperator::scad(2.0), ConfigError);
  CHECK_THROWS_AS(ThresholdingOperator::scad(1.5), ConfigError);
}

TEST_CASE("defining function examples") {
  CHECK(apply_defining(ThresholdingOperator::soft(), 2.0, 1.0) == 1.0);
  CHECK(apply_defining(ThresholdingOperator::hard(), 2.0, 1.0) == 2.0);
  CHECK(apply_defining(ThresholdingOperator::scad(), 3.0, 1.0) ==
        doctest::Approx(4.4 / 1.7).epsilon(1e-14));
  CHECK(apply_defining(ThresholdingOperator::soft(), -2.0, 1.0) == -1.0);
}

TEST_CASE("scad pieces") {
  const auto op = ThresholdingOperator::scad();
  CHECK(apply_defining(op, 1.5, 1.0) == doctest::Approx(0.5));
  CHECK(apply_defining(op, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(apply_defining(op, 3.7, 1.0) == doctest::Approx(3.7));
  CHECK(apply_defining(op, 5.0, 1.0) == 5.0);
  // Continuous at both breakpoints.
  CHECK(apply_defining(op, 2.0 + 1e-12, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(apply_defining(op, 3.7 - 1e-12, 1.0) == doctest::Approx(3.7).epsilon(1e-9));
}

TEST_CASE("defining function domain errors") {
  for (const auto& op : all_operators()) {
    CHECK_THROWS_AS(apply_defining(op, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(apply_defining(op, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(apply_defining(op, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(apply_defining(op, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(apply_defining(op, 2.0, -1.0), DomainError);
  }
}

TEST_CASE("half matches the root of its stationarity equation") {
  const auto op = ThresholdingOperator::half();
  for (double tau : {0.1, 1.0, 3.0}) {
    for (double ratio : {1.0001, 1.01, 1.2, 2.0, 5.0, 40.0}) {
      const double u = ratio * tau;
      CHECK(apply_defining(op, u, tau) == doctest::Approx(half_oracle(u, tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("two_thirds matches the root of its stationarity equation") {
  const auto op = ThresholdingOperator::two_thirds();
  for (double tau : {0.1, 1.0, 3.0}) {
    for (double ratio : {1.0001, 1.01, 1.2, 2.0, 5.0, 40.0}) {
      const double u = ratio * tau;
      CHECK(apply_defining(op, u, tau) ==
            doctest::Approx(two_thirds_oracle(u, tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("jump values at the threshold") {
  const double tau = 1.7;
  CHECK(detail::defining_closed(ThresholdingOperator::half(), tau, tau) ==
        doctest::Approx(2.0 * tau / 3.0).epsilon(1e-12));
  CHECK(detail::defining_closed(ThresholdingOperator::two_thirds(), tau, tau) ==
        doctest::Approx(tau / 2.0).epsilon(1e-12));
  CHECK(detail::defining_closed(ThresholdingOperator::soft(), tau, tau) == 0.0);
  CHECK(detail::defining_closed(ThresholdingOperator::hard(), -tau, tau) == -tau);
  CHECK(apply_defining(ThresholdingOperator::half(), tau * (1 + 1e-12), tau) ==
        doctest::Approx(2.0 * tau / 3.0).epsilon(1e-5));
}

TEST_CASE("oddness, monotonicity and the boundedness bracket") {
  for (const auto& op : all_operators()) {
    CAPTURE(op.name());
    for (double tau : {0.25, 1.0, 4.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int i = 1; i <= 2000; ++i) {
        const double u = tau * (1.0 + 9.0 * i / 2000.0);
        const double f = apply_defining(op, u, tau);
        CHECK(std::abs(apply_defining(op, -u, tau) + f) <= 1e-12);
        CHECK(f > prev);
        prev = f;
        const double slack = 1e-9 * std::abs(u);
        CHECK(f >= u - op.c1() * tau - slack);
        CHECK(f <= u - op.c2() * tau + slack);
      }
    }
  }
}

TEST_CASE("thresholding examples and properties") {
  for (const auto& op : all_operators()) {
    CHECK(apply_threshold(op, 0.5, 1.0) == 0.0);
    CHECK(apply_threshold(op, 1.0, 1.0) == 0.0);
    CHECK(apply_threshold(op, 0.7, 0.0) == 0.7);
    CHECK(apply_threshold(op, -0.7, 0.0) == -0.7);
    for (double u = -6.0; u <= 6.0; u += 0.013) {
      const double h = apply_threshold(op, u, 1.3);
      CHECK(std::abs(h) <= std::abs(u));
      CHECK((h == 0.0 || (h > 0) == (u > 0)));
    }
  }
  CHECK(apply_threshold(ThresholdingOperator::soft(), 2.0, 1.0) == 1.0);
}

TEST_CASE("vector thresholding is componentwise") {
  Vector z(3);
  z << 2, -2, 0.5;
  Vector expected(3);
  expected << 1, -1, 0;
  CHECK(apply_vector(ThresholdingOperator::soft(), z, 1.0) == expected);

  Vector w(3);
  w << 3, 0, -0.2;
  Vector w_expected(3);
  w_expected << 3, 0, 0;
  CHECK(apply_vector(ThresholdingOperator::hard(), w, 0.5) == w_expected);

  for (const auto& op : all_operators()) {
    CHECK(apply_vector(op, Vector::Zero(5), 0.3).isZero(0.0));
    CHECK(apply_vector(op, Vector::Zero(5), 0.0).isZero(0.0));
    Vector r = Vector::LinSpaced(21, -4.0, 4.0);
    const Vector h = apply_vector(op, r, 1.1);
    for (Index i = 0; i < r.size(); ++i) CHECK(h[i] == apply_threshold(op, r[i], 1.1));
  }
}

TEST_CASE("boundedness estimates agree with the declared constants") {
  std::vector<double> taus{0.5, 1.0, 2.0};
  const auto grid_for = [&](double a) {
    std::vector<double> u;
    // Strictly above the largest tau, up to 5 a tau_max.
    for (int i = 1; i <= 4000; ++i) u.push_back(2.0 + (5.0 * a * 2.0 - 2.0) * i / 4000.0);
    return u;
  };
  const auto u_grid = grid_for(3.7);

  auto soft = estimate_boundedness(ThresholdingOperator::soft(), u_grid, taus);
  CHECK(soft.c1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(soft.c2 == doctest::Approx(1.0).epsilon(1e-12));
  auto hard = estimate_boundedness(ThresholdingOperator::hard(), u_grid, taus);
  CHECK(hard.c1 == 0.0);
  CHECK(hard.c2 == 0.0);

  // A grid that reaches down to u -> tau+ for every tau separately.
  for (const auto& op : all_operators()) {
    CAPTURE(op.name());
    double c1_hat = -std::numeric_limits<double>::infinity();
    double c2_hat = std::numeric_limits<double>::infinity();
    for (double tau : taus) {
      std::vector<double> u;
      for (int i = 1; i <= 20000; ++i) u.push_back(tau * (1.0 + 1e-7 + 5.0 * 3.7 * i / 20000.0));
      const std::vector<double> t{tau};
      const auto est = estimate_boundedness(op, u, t);
      c1_hat = std::max(c1_hat, est.c1);
      c2_hat = std::min(c2_hat, est.c2);
    }
    CHECK(c1_hat <= op.c1() + 1e-9);
    CHECK(c2_hat >= op.c2() - 1e-9);
    CHECK(c1_hat == doctest::Approx(op.c1()).epsilon(1e-3));
    // half and two_thirds approach c2 = 0 only as u grows without bound.
    if (op.kind() != OperatorKind::half && op.kind() != OperatorKind::two_thirds) {
      CHECK(c2_hat == doctest::Approx(op.c2()).epsilon(1e-3));
    } else {
      CHECK((1e8 - apply_defining(op, 1e8, 1.0)) < 1e-3);
    }
  }
}

TEST_CASE("boundedness estimate rejects invalid grids") {
  const std::vector<double> empty;
  const std::vector<double> one{1.0};
  const std::vector<double> two{2.0};
  CHECK_THROWS_AS(estimate_boundedness(ThresholdingOperator::soft(), empty, one), DomainError);
  CHECK_THROWS_AS(estimate_boundedness(ThresholdingOperator::soft(), two, empty), DomainError);
  CHECK_THROWS_AS(estimate_boundedness(ThresholdingOperator::soft(), one, one), DomainError);
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(estimate_boundedness(ThresholdingOperator::soft(), two, zero), DomainError);
}
