#pragma once

#include <span>
#include <string_view>

#include "ait/types.hpp"

namespace ait {

enum class OperatorKind { hard, soft, half, two_thirds, scad };

/// A componentwise thresholding rule h_tau built from an odd, increasing
/// defining function f_tau, together with the boundedness constants
/// (c1, c2) for which u - c1*tau <= f_tau(u) <= u - c2*tau whenever u >= tau.
///
/// The threshold tau is always the jump point of the operator: every
/// operator returns 0 for |u| <= tau and f_tau(u) above it.
class ThresholdingOperator {
 public:
  static ThresholdingOperator hard();
  static ThresholdingOperator soft();
  static ThresholdingOperator half();
  static ThresholdingOperator two_thirds();
  static ThresholdingOperator scad(double a = kDefaultScadA);

  /// Accepts "hard" | "soft" | "half" | "two_thirds" | "scad".
  static ThresholdingOperator from_name(std::string_view name,
                                        double scad_a = kDefaultScadA);

  OperatorKind kind() const { return kind_; }
  std::string_view name() const;
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  /// Only meaningful for scad.
  double scad_a() const { return scad_a_; }

  static constexpr double kDefaultScadA = 3.7;

 private:
  ThresholdingOperator(OperatorKind kind, double c1, double c2, double a);

  OperatorKind kind_;
  double c1_;
  double c2_;
  double scad_a_;
};

/// f_tau(u). Requires tau > 0 and |u| > tau; throws DomainError otherwise.
double apply_defining(const ThresholdingOperator& op, double u, double tau);

/// h_tau(u): f_tau(u) above the threshold, 0 at or below it, identity when
/// tau == 0.
double apply_threshold(const ThresholdingOperator& op, double u, double tau);

Vector apply_vector(const ThresholdingOperator& op, const Vector& z, double tau);

struct BoundednessEstimate {
  double c1;
  double c2;
};

/// Brute-force estimate of (c1, c2) as the max / min of (u - f_tau(u)) / tau
/// over every (u, tau) pair of the two grids. Every pair must satisfy u > tau > 0.
BoundednessEstimate estimate_boundedness(const ThresholdingOperator& op,
                                         std::span<const double> u_grid,
                                         std::span<const double> tau_grid);

namespace detail {
// Defining function on the closed set |u| >= tau > 0. At |u| == tau this is the
// right limit of f_tau, which the solver needs when a support entry ties with
// the (k+1)-th magnitude.
double defining_closed(const ThresholdingOperator& op, double u, double tau);
}  // namespace detail

}  // namespace ait
