#include "ait/thresholding.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ait {

namespace {

double sign(double u) { return u < 0.0 ? -1.0 : 1.0; }

// l_{1/2} thresholding written in terms of its jump point tau. With
// lambda = 8 tau^{3/2} / sqrt(54) the classical arccos formula has its jump at
// exactly tau, where it takes the value 2 tau / 3.
double half_magnitude(double v, double tau) {
  const double arg = std::pow(tau / v, 1.5) / std::numbers::sqrt2;
  const double phi = std::acos(arg);
  return (2.0 / 3.0) * v *
         (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - (2.0 / 3.0) * phi));
}

// l_{2/3} thresholding in terms of its jump point tau:
// tau = (2/3) (3 lambda^3)^{1/4}  <=>  lambda^3 = 27 tau^4 / 16.
// The value at the jump is tau / 2.
double two_thirds_magnitude(double v, double tau) {
  const double lambda = std::cbrt(27.0 / 16.0) * std::pow(tau, 4.0 / 3.0);
  const double theta = std::acosh(27.0 * v * v / (16.0 * std::pow(lambda, 1.5)));
  const double phi = 2.0 / std::sqrt(3.0) * std::pow(lambda, 0.25) *
                     std::sqrt(std::cosh(theta / 3.0));
  const double radicand = std::max(0.0, 2.0 * v / phi - phi * phi);
  const double root = 0.5 * (phi + std::sqrt(radicand));
  return root * root * root;
}

double scad_magnitude(double v, double tau, double a) {
  if (v <= 2.0 * tau) return v - tau;
  if (v <= a * tau) return ((a - 1.0) * v - a * tau) / (a - 2.0);
  return v;
}

}  // namespace

ThresholdingOperator::ThresholdingOperator(OperatorKind kind, double c1, double c2,
                                           double a)
    : kind_(kind), c1_(c1), c2_(c2), scad_a_(a) {}

ThresholdingOperator ThresholdingOperator::hard() {
  return {OperatorKind::hard, 0.0, 0.0, 0.0};
}
ThresholdingOperator ThresholdingOperator::soft() {
  return {OperatorKind::soft, 1.0, 1.0, 0.0};
}
ThresholdingOperator ThresholdingOperator::half() {
  return {OperatorKind::half, 1.0 / 3.0, 0.0, 0.0};
}
ThresholdingOperator ThresholdingOperator::two_thirds() {
  return {OperatorKind::two_thirds, 0.5, 0.0, 0.0};
}
ThresholdingOperator ThresholdingOperator::scad(double a) {
  if (!(a > 2.0)) {
    throw ConfigError("scad parameter a must exceed 2, got " + std::to_string(a));
  }
  return {OperatorKind::scad, 1.0, 0.0, a};
}

ThresholdingOperator ThresholdingOperator::from_name(std::string_view name,
                                                     double scad_a) {
  if (name == "hard") return hard();
  if (name == "soft") return soft();
  if (name == "half") return half();
  if (name == "two_thirds") return two_thirds();
  if (name == "scad") return scad(scad_a);
  throw ConfigError("unknown thresholding operator '" + std::string(name) + "'");
}

std::string_view ThresholdingOperator::name() const {
  switch (kind_) {
    case OperatorKind::hard: return "hard";
    case OperatorKind::soft: return "soft";
    case OperatorKind::half: return "half";
    case OperatorKind::two_thirds: return "two_thirds";
    case OperatorKind::scad: return "scad";
  }
  return "unknown";
}

namespace detail {

double defining_closed(const ThresholdingOperator& op, double u, double tau) {
  const double v = std::abs(u);
  double magnitude = v;
  switch (op.kind()) {
    case OperatorKind::hard: magnitude = v; break;
    case OperatorKind::soft: magnitude = v - tau; break;
    case OperatorKind::half: magnitude = half_magnitude(v, tau); break;
    case OperatorKind::two_thirds: magnitude = two_thirds_magnitude(v, tau); break;
    case OperatorKind::scad: magnitude = scad_magnitude(v, tau, op.scad_a()); break;
  }
  return sign(u) * magnitude;
}

}  // namespace detail

double apply_defining(const ThresholdingOperator& op, double u, double tau) {
  if (!(tau > 0.0)) throw DomainError("defining function needs tau > 0");
  if (!(std::abs(u) > tau)) throw DomainError("defining function needs |u| > tau");
  return detail::defining_closed(op, u, tau);
}

double apply_threshold(const ThresholdingOperator& op, double u, double tau) {
  if (tau == 0.0) return u;
  if (std::abs(u) <= tau) return 0.0;
  return detail::defining_closed(op, u, tau);
}

Vector apply_vector(const ThresholdingOperator& op, const Vector& z, double tau) {
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) out[i] = apply_threshold(op, z[i], tau);
  return out;
}

BoundednessEstimate estimate_boundedness(const ThresholdingOperator& op,
                                         std::span<const double> u_grid,
                                         std::span<const double> tau_grid) {
  if (u_grid.empty() || tau_grid.empty()) {
    throw DomainError("estimate_boundedness needs nonempty grids");
  }
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (double tau : tau_grid) {
    for (double u : u_grid) {
      if (!(tau > 0.0) || !(u > tau)) {
        throw DomainError("estimate_boundedness grid point violates u > tau > 0");
      }
      const double gap = (u - apply_defining(op, u, tau)) / tau;
      hi = std::max(hi, gap);
      lo = std::min(lo, gap);
    }
  }
  return {hi, lo};
}

}  // namespace ait
