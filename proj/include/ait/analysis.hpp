#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ait/thresholding.hpp"
#include "ait/types.hpp"

namespace ait {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Hoelder-conjugate exponents, 1/p + 1/q = 1, p in [1, inf), q in (1, inf].
class NormPair {
 public:
  NormPair(double p, double q);
  static NormPair from_p(double p);
  static NormPair l1_linf() { return NormPair(1.0, kInf); }
  static NormPair l2_l2() { return NormPair(2.0, 2.0); }

  double p() const { return p_; }
  double q() const { return q_; }
  /// "1,inf" style label.
  std::string label() const;

  bool operator==(const NormPair&) const = default;

 private:
  double p_;
  double q_;
};

/// l_p norm with p in [1, inf].
double lp_norm(const Vector& v, double p);

/// Cap on the number of supports any exact enumeration may visit.
struct EnumerationBudget {
  std::uint64_t max_supports = 2'000'000;
};

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Settings for the multi-start ascent used when no closed form exists.
struct AscentOptions {
  int restarts = 64;
  int steps = 500;
  std::uint64_t seed = 0x5eed;
};

/// max_{i != j} |<A_i, A_j>| / (||A_i|| ||A_j||).
double coherence(const Matrix& A);

/// Exact restricted isometry constant of a unit-column matrix by enumeration:
/// the largest spectral norm of I - A_S^T A_S over |S| = k.
double ric(const Matrix& A, Index k, const EnumerationBudget& budget = {});

struct GricValue {
  double value = 0.0;
  /// False when the value is only a lower bound from multi-start ascent.
  bool exact = false;
};

/// Generalized restricted isometry constant: the largest p -> q operator norm of
/// I - A_S^T A_S over |S| <= k. Exact for (1, inf) and (2, 2).
GricValue gric(const Matrix& A, Index k, const NormPair& norms,
               const EnumerationBudget& budget = {}, const AscentOptions& ascent = {});

/// sup over k-sparse z of |z^T (A^T A - I) z| / ||z||_p^2. Exact for p = 2,
/// otherwise a multi-start lower bound.
GricValue quadratic_form_sup(const Matrix& A, Index k, double p,
                             const EnumerationBudget& budget = {},
                             const AscentOptions& ascent = {});

/// Checks the sparse norm-equivalence bounds with k = ||x||_0:
/// for q <= p, ||x||_p <= ||x||_q <= k^{1/q - 1/p} ||x||_p, and for any pair
/// ||x||_p <= k^{max(1/p - 1/q, 0)} ||x||_q. Relative slack 1e-12.
bool norm_equivalence_check(const Vector& x, double p, double q);

struct ContractionConstants {
  double L1 = 0.0;
  double L2 = 0.0;
  double L = 0.0;
};

ContractionConstants contraction_constants(int k_star, const NormPair& norms, double c1,
                                           double c2);

struct StepInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double s) const { return lo < s && s < hi; }
};

/// (2 k*)^{max(1/q - 1/p, 0)}.
double sparsity_norm_factor(int k_star, const NormPair& norms);

/// Admissible constant steps around 1. Throws HypothesisError when beta >= 1/L.
StepInterval step_interval(int k_star, const NormPair& norms, double beta, double L);

struct Rate {
  double gamma = 0.0;
  double rho = 0.0;
};

Rate convergence_rate(double s, int k_star, const NormPair& norms, double beta, double L);

/// Sharper (1, inf) rate: gamma = max(|1 - s|, s mu).
Rate coherence_rate(double s, double mu, double L);

/// (1 - 1/L, min(1/(L mu), 1 + 1/L)).
StepInterval coherence_step_interval(double mu, double L);

/// ((sqrt 5 + 1)/2) * delta.
double hard_golden_rate(double delta);

inline constexpr double kGoldenThreshold = 0.6180339887498948482;  // (sqrt 5 - 1)/2

/// beta_{2k} < (2k)^{min(1/q - 1/p, 0)}. A zero constant counts as satisfied.
bool check_uniqueness_condition(double beta_2k, int k, const NormPair& norms);

struct SparseSolution {
  Support support;
  Vector x;
};

/// Every distinct solution of A x = b (residual <= fit_tol) with at most k_max
/// nonzeros, found by least squares on every support of size <= k_max.
std::vector<SparseSolution> brute_force_sparsest(const Matrix& A, const Vector& b,
                                                 Index k_max, double fit_tol,
                                                 const EnumerationBudget& budget = {});

/// Matrix constants and the convergence conditions they certify for a given
/// true sparsity, operator and norm pair.
struct AnalysisReport {
  Index m = 0;
  Index n = 0;
  int k_star = 1;
  std::string op;
  double c1 = 0.0;
  double c2 = 0.0;
  NormPair norms = NormPair::l2_l2();

  double mu = 0.0;
  /// delta_r for r = 1 .. max enumerable level.
  std::map<Index, double> delta;

  struct BetaEntry {
    Index k;
    NormPair norms;
    GricValue value;
  };
  std::vector<BetaEntry> beta;

  ContractionConstants constants;
  /// beta_{3k*+1} at the report's norm pair.
  std::optional<double> beta_contraction;
  std::optional<StepInterval> steps;
  std::optional<Rate> rate_at_unit_step;

  /// Named condition flags; missing levels (beyond n or the budget) are false.
  std::map<std::string, bool> conditions;
  std::vector<std::string> notes;
};

/// Builds the report on the column-normalized copy of A.
AnalysisReport analyze(const Matrix& A, int k_star, const ThresholdingOperator& op,
                       const NormPair& norms, const EnumerationBudget& budget = {});

}  // namespace ait
