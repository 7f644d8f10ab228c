#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "ait/types.hpp"

namespace ait {

enum class SignalDist { gaussian, binary };

/// What the SNR in decibels is measured against.
enum class SnrReference {
  /// 20 log10(||A x*|| / ||eps||).
  measurement,
  /// Per-entry noise deviation 10^(-snr/20) times the RMS of the nonzero
  /// signal entries.
  signal_entry,
};

SnrReference snr_reference_from_name(std::string_view name);
std::string_view snr_reference_name(SnrReference ref);

SignalDist signal_dist_from_name(std::string_view name);
std::string_view signal_dist_name(SignalDist dist);

struct ProblemSpec {
  Index m = 250;
  Index n = 400;
  Index k_star = 15;
  /// Entry variance of A; absent means 1/m.
  std::optional<double> matrix_variance;
  SignalDist signal_dist = SignalDist::gaussian;
  /// Requested SNR in decibels; absent means noiseless.
  std::optional<double> snr_db;
  SnrReference snr_reference = SnrReference::measurement;
  std::uint64_t seed = 0;

  double variance() const {
    return matrix_variance ? *matrix_variance : 1.0 / static_cast<double>(m);
  }
  /// Throws ConfigError unless 1 <= k_star <= min(m, n) and the variance is positive.
  void validate() const;
};

struct Problem {
  Matrix A;
  Vector b;
  Vector x_star;
  Vector epsilon;
  Support I_star;
};

/// Draws a problem instance. A, the support, the nonzero values and the noise
/// each come from their own sub-stream of spec.seed, so changing one part of
/// the spec leaves the draws of the others intact.
Problem generate(const ProblemSpec& spec);

enum class ErrorNorm { l2, linf };

/// ||x_rec - x_star|| / ||x_star||. Throws DomainError when x_star is zero.
double relative_error(const Vector& x_rec, const Vector& x_star, ErrorNorm norm);

/// Relative l_inf error at most 1e-3.
bool is_success(const Vector& x_rec, const Vector& x_star);

inline constexpr double kSuccessTolerance = 1e-3;

}  // namespace ait
