#include "ait/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ait/rng.hpp"
#include "ait/solver.hpp"

namespace ait {

namespace {

constexpr double kUnitColumnTol = 1e-8;

void require_unit_columns(const Matrix& A) {
  for (Index j = 0; j < A.cols(); ++j) {
    if (std::abs(A.col(j).norm() - 1.0) > kUnitColumnTol) {
      throw DomainError("column " + std::to_string(j) +
                        " is not unit norm; normalize the matrix first");
    }
  }
}

void require_budget(std::uint64_t count, const EnumerationBudget& budget,
                    const std::string& what) {
  if (count > budget.max_supports) {
    throw BudgetExceeded(what + " needs " + std::to_string(count) +
                         " supports, budget is " +
                         std::to_string(budget.max_supports) +
                         "; shrink n or k");
  }
}

// Visits every k-subset of {0, ..., n-1} in lexicographic order.
void for_each_support(Index n, Index k, const std::function<void(const Support&)>& fn) {
  if (k < 0 || k > n) return;
  Support s(static_cast<std::size_t>(k));
  std::iota(s.begin(), s.end(), Index{0});
  while (true) {
    fn(s);
    Index i = k - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++s[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

// I - G_SS for the principal block of the Gram matrix.
Matrix deviation_block(const Matrix& gram, const Support& s) {
  const Index k = static_cast<Index>(s.size());
  Matrix M(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      M(a, b) = (a == b ? 1.0 : 0.0) - gram(s[static_cast<std::size_t>(a)],
                                            s[static_cast<std::size_t>(b)]);
    }
  }
  return M;
}

Index clamp_level(Index k, Index n) {
  if (k < 1) throw ConfigError("sparsity level must be at least 1");
  return std::min(k, n);
}

// Scales v onto the unit l_p sphere (v must be nonzero).
Vector to_unit_sphere(const Vector& v, double p) { return v / lp_norm(v, p); }

// The maximizer of y^T v over the unit l_p ball: y_i ~ sgn(v_i) |v_i|^{q-1}.
Vector dual_direction(const Vector& v, double q) {
  Vector y = v.unaryExpr([q](double t) {
    return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), q - 1.0), t);
  });
  const double p = q / (q - 1.0);
  const double norm = lp_norm(y, p);
  return norm > 0.0 ? Vector(y / norm) : y;
}

// Projected ascent of |x^T M x| / ||x||_p^2 on the unit l_p sphere from a
// given start; returns the best point seen.
Vector quadratic_ascent(const Matrix& M, double p, Vector x, int steps, double& best) {
  auto value = [&](const Vector& v) {
    return std::abs(v.dot(M * v)) / std::pow(lp_norm(v, p), 2.0);
  };
  x = to_unit_sphere(x, p);
  double current = value(x);
  const double sigma = x.dot(M * x) >= 0.0 ? 1.0 : -1.0;
  double eta = 0.5;
  Vector best_x = x;
  best = std::max(best, current);
  for (int it = 0; it < steps && eta > 1e-12; ++it) {
    const Vector Mx = M * x;
    const double quad = x.dot(Mx);
    const Vector dnorm = x.unaryExpr([p](double t) {
      return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), p - 1.0), t);
    });
    const Vector grad = 2.0 * sigma * (Mx - quad * dnorm);
    if (grad.norm() < 1e-15) break;
    const Vector trial = x + eta * grad;
    if (trial.isZero(0.0)) {
      eta *= 0.5;
      continue;
    }
    const Vector cand = to_unit_sphere(trial, p);
    const double v = value(cand);
    if (v > current) {
      x = cand;
      current = v;
      eta *= 1.25;
      if (current > best) {
        best = current;
        best_x = x;
      }
    } else {
      eta *= 0.5;
    }
  }
  return best_x;
}

// Alternating maximization of y^T M x over unit l_p balls, from x.
double bilinear_ascent(const Matrix& M, double p, double q, Vector x, int steps) {
  x = to_unit_sphere(x, p);
  double best = 0.0;
  for (int it = 0; it < steps; ++it) {
    const Vector v = M * x;
    const double value = lp_norm(v, q);
    if (value <= best * (1.0 + 1e-14) && it > 0) {
      best = std::max(best, value);
      break;
    }
    best = std::max(best, value);
    if (value == 0.0) break;
    const Vector y = dual_direction(v, q);
    const Vector w = M.transpose() * y;
    if (w.isZero(0.0)) break;
    x = dual_direction(w, q);
  }
  return best;
}

Vector random_start(CounterRng& rng, Index k) {
  Vector v(k);
  for (Index i = 0; i < k; ++i) v[i] = rng.normal();
  return v;
}

// Lower bounds that every exponent shares: coordinate and pair vertices.
double pair_vertex_quadratic(const Matrix& M, double p) {
  double best = 0.0;
  const Index k = M.rows();
  const double pair_norm_sq = std::pow(2.0, 2.0 / p);
  for (Index i = 0; i < k; ++i) {
    best = std::max(best, std::abs(M(i, i)));
    for (Index j = i + 1; j < k; ++j) {
      best = std::max(best, std::abs(M(i, i) + M(j, j) + 2.0 * M(i, j)) / pair_norm_sq);
      best = std::max(best, std::abs(M(i, i) + M(j, j) - 2.0 * M(i, j)) / pair_norm_sq);
    }
  }
  return best;
}

}  // namespace

NormPair::NormPair(double p, double q) : p_(p), q_(q) {
  if (!(p >= 1.0) || std::isinf(p)) throw ConfigError("norm exponent p must lie in [1, inf)");
  if (!(q > 1.0)) throw ConfigError("norm exponent q must lie in (1, inf]");
  const double conj = 1.0 / p + (std::isinf(q) ? 0.0 : 1.0 / q);
  if (std::abs(conj - 1.0) > 1e-12) throw ConfigError("p and q must be conjugate");
}

NormPair NormPair::from_p(double p) {
  if (p == 1.0) return l1_linf();
  return NormPair(p, p / (p - 1.0));
}

std::string NormPair::label() const {
  std::ostringstream os;
  os << p_ << ',';
  if (std::isinf(q_)) {
    os << "inf";
  } else {
    os << q_;
  }
  return os.str();
}

double lp_norm(const Vector& v, double p) {
  if (v.size() == 0) return 0.0;
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  // Scaled to avoid overflow / underflow in |v_i|^p.
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * std::pow((v.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(result);
}

double coherence(const Matrix& A) {
  if (A.cols() < 2) throw DomainError("coherence needs at least two columns");
  const Vector norms = A.colwise().norm().transpose();
  for (Index j = 0; j < A.cols(); ++j) {
    if (!(norms[j] > 0.0)) throw DomainError("coherence: column " + std::to_string(j) + " is zero");
  }
  double mu = 0.0;
  for (Index i = 0; i < A.cols(); ++i) {
    for (Index j = i + 1; j < A.cols(); ++j) {
      mu = std::max(mu, std::abs(A.col(i).dot(A.col(j))) / (norms[i] * norms[j]));
    }
  }
  return mu;
}

double ric(const Matrix& A, Index k, const EnumerationBudget& budget) {
  require_unit_columns(A);
  const Index level = clamp_level(k, A.cols());
  require_budget(binomial(static_cast<std::uint64_t>(A.cols()),
                          static_cast<std::uint64_t>(level)),
                 budget, "restricted isometry constant");
  const Matrix gram = A.transpose() * A;
  double delta = 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  for_each_support(A.cols(), level, [&](const Support& s) {
    eig.compute(deviation_block(gram, s), Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    delta = std::max({delta, std::abs(ev[0]), std::abs(ev[ev.size() - 1])});
  });
  return delta;
}

GricValue gric(const Matrix& A, Index k, const NormPair& norms,
               const EnumerationBudget& budget, const AscentOptions& ascent) {
  require_unit_columns(A);
  const Index level = clamp_level(k, A.cols());
  require_budget(binomial(static_cast<std::uint64_t>(A.cols()),
                          static_cast<std::uint64_t>(level)),
                 budget, "generalized restricted isometry constant");
  const Matrix gram = A.transpose() * A;
  const double p = norms.p();
  const double q = norms.q();

  if (p == 1.0) {
    // The l1 -> linf norm is attained at a vertex +-e_j of the l1 ball.
    double best = 0.0;
    for_each_support(A.cols(), level, [&](const Support& s) {
      const Matrix M = deviation_block(gram, s);
      for (Index j = 0; j < M.cols(); ++j) best = std::max(best, M.col(j).cwiseAbs().maxCoeff());
    });
    return {best, true};
  }
  if (p == 2.0) {
    double best = 0.0;
    Eigen::JacobiSVD<Matrix> svd;
    for_each_support(A.cols(), level, [&](const Support& s) {
      svd.compute(deviation_block(gram, s));
      best = std::max(best, svd.singularValues()[0]);
    });
    return {best, true};
  }

  double best = 0.0;
  std::uint64_t support_index = 0;
  for_each_support(A.cols(), level, [&](const Support& s) {
    const Matrix M = deviation_block(gram, s);
    // Vertex cross terms: y = +-e_i, x = +-e_j.
    best = std::max(best, M.cwiseAbs().maxCoeff());
    CounterRng rng(derive_seed(ascent.seed, support_index++));
    for (int r = 0; r < ascent.restarts; ++r) {
      Vector start = random_start(rng, M.rows());
      if (r % 2 == 1) {
        // Seed from a quadratic-form maximizer so the estimate dominates the
        // quadratic-form estimate on the same support.
        double unused = 0.0;
        start = quadratic_ascent(M, p, start, ascent.steps, unused);
      }
      best = std::max(best, bilinear_ascent(M, p, q, start, ascent.steps));
    }
  });
  return {best, false};
}

GricValue quadratic_form_sup(const Matrix& A, Index k, double p,
                             const EnumerationBudget& budget, const AscentOptions& ascent) {
  require_unit_columns(A);
  if (!(p >= 1.0)) throw ConfigError("norm exponent p must be at least 1");
  if (p == 2.0) return {ric(A, k, budget), true};
  const Index level = clamp_level(k, A.cols());
  require_budget(binomial(static_cast<std::uint64_t>(A.cols()),
                          static_cast<std::uint64_t>(level)),
                 budget, "quadratic form supremum");
  const Matrix gram = A.transpose() * A;
  double best = 0.0;
  std::uint64_t support_index = 0;
  for_each_support(A.cols(), level, [&](const Support& s) {
    const Matrix M = deviation_block(gram, s);
    best = std::max(best, pair_vertex_quadratic(M, p));
    CounterRng rng(derive_seed(ascent.seed ^ 0xa5a5a5a5ULL, support_index++));
    for (int r = 0; r < ascent.restarts; ++r) {
      quadratic_ascent(M, p, random_start(rng, M.rows()), ascent.steps, best);
    }
  });
  return {best, false};
}

bool norm_equivalence_check(const Vector& x, double p, double q) {
  constexpr double kSlack = 1e-12;
  const double k = std::max<double>(1.0, static_cast<double>((x.array() != 0.0).count()));
  const double np = lp_norm(x, p);
  const double nq = lp_norm(x, q);
  auto leq = [](double lhs, double rhs) { return lhs <= rhs * (1.0 + kSlack) + 1e-300; };
  auto inv = [](double e) { return std::isinf(e) ? 0.0 : 1.0 / e; };

  bool ok = true;
  if (q <= p) {
    ok = ok && leq(np, nq) && leq(nq, std::pow(k, inv(q) - inv(p)) * np);
  }
  ok = ok && leq(np, std::pow(k, std::max(inv(p) - inv(q), 0.0)) * nq);
  return ok;
}

ContractionConstants contraction_constants(int k_star, const NormPair& norms, double c1,
                                           double c2) {
  if (k_star < 1) throw ConfigError("true sparsity must be at least 1");
  if (!(0.0 <= c2 && c2 <= c1 && c1 <= 1.0)) {
    throw ConfigError("boundedness constants must satisfy 0 <= c2 <= c1 <= 1");
  }
  const double p = norms.p();
  const double ratio = std::isinf(norms.q()) ? 0.0 : p / norms.q();
  const double e = std::max(1.0 - ratio, 0.0);
  const double k = k_star;
  const double half_pow = std::pow(2.0, p - 1.0);

  ContractionConstants out;
  out.L1 = half_pow * std::pow(k, e) + (half_pow - std::pow(c2, p) + 1.0) * k;
  out.L2 = std::pow(2.0, p) * std::pow(2.0 * k, e) + half_pow * std::pow(c1, p) * k;
  out.L = std::min(std::pow(out.L1, 1.0 / p), std::pow(out.L2, 1.0 / p));
  return out;
}

double sparsity_norm_factor(int k_star, const NormPair& norms) {
  const double inv_q = std::isinf(norms.q()) ? 0.0 : 1.0 / norms.q();
  return std::pow(2.0 * k_star, std::max(inv_q - 1.0 / norms.p(), 0.0));
}

StepInterval step_interval(int k_star, const NormPair& norms, double beta, double L) {
  if (!(beta < 1.0 / L)) {
    throw HypothesisError("step interval needs beta < 1/L (beta = " +
                          std::to_string(beta) + ", 1/L = " + std::to_string(1.0 / L) + ")");
  }
  const double kappa = sparsity_norm_factor(k_star, norms);
  return {(kappa - 1.0 / L) / (kappa - beta), (kappa + 1.0 / L) / (kappa + beta)};
}

Rate convergence_rate(double s, int k_star, const NormPair& norms, double beta, double L) {
  const double kappa = sparsity_norm_factor(k_star, norms);
  const double gamma = std::abs(1.0 - s) * kappa + s * beta;
  return {gamma, gamma * L};
}

Rate coherence_rate(double s, double mu, double L) {
  const double gamma = std::max(std::abs(1.0 - s), s * mu);
  return {gamma, gamma * L};
}

StepInterval coherence_step_interval(double mu, double L) {
  const double upper = mu > 0.0 ? std::min(1.0 / (L * mu), 1.0 + 1.0 / L) : 1.0 + 1.0 / L;
  return {1.0 - 1.0 / L, upper};
}

double hard_golden_rate(double delta) {
  return (std::sqrt(5.0) + 1.0) / 2.0 * delta;
}

bool check_uniqueness_condition(double beta_2k, int k, const NormPair& norms) {
  if (k < 1) throw ConfigError("sparsity must be at least 1");
  const double inv_q = std::isinf(norms.q()) ? 0.0 : 1.0 / norms.q();
  const double bound = std::pow(2.0 * k, std::min(inv_q - 1.0 / norms.p(), 0.0));
  return beta_2k >= 0.0 && beta_2k < bound;
}

std::vector<SparseSolution> brute_force_sparsest(const Matrix& A, const Vector& b,
                                                 Index k_max, double fit_tol,
                                                 const EnumerationBudget& budget) {
  if (A.rows() != b.size()) throw DimensionError("A rows must match b length");
  if (k_max < 0) throw ConfigError("k_max must be nonnegative");
  const Index n = A.cols();
  const Index top = std::min(k_max, n);
  std::uint64_t total = 0;
  for (Index s = 0; s <= top; ++s) {
    const std::uint64_t c = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
    total = (total > UINT64_MAX - c) ? UINT64_MAX : total + c;
  }
  require_budget(total, budget, "sparsest-solution enumeration");

  std::vector<SparseSolution> found;
  auto consider = [&](const Vector& x) {
    const double scale = std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
    Vector cleaned = x;
    Support nz;
    for (Index i = 0; i < cleaned.size(); ++i) {
      if (std::abs(cleaned[i]) <= 1e-12 * scale) {
        cleaned[i] = 0.0;
      } else {
        nz.push_back(i);
      }
    }
    for (const auto& sol : found) {
      if (sol.support == nz && (sol.x - cleaned).cwiseAbs().maxCoeff() <= 1e-9 * scale) return;
    }
    found.push_back({std::move(nz), std::move(cleaned)});
  };

  if (b.norm() <= fit_tol) consider(Vector::Zero(n));
  for (Index size = 1; size <= top; ++size) {
    for_each_support(n, size, [&](const Support& s) {
      Matrix sub(A.rows(), size);
      for (Index j = 0; j < size; ++j) sub.col(j) = A.col(s[static_cast<std::size_t>(j)]);
      const Vector coef = sub.completeOrthogonalDecomposition().solve(b);
      if ((sub * coef - b).norm() > fit_tol) return;
      Vector x = Vector::Zero(n);
      for (Index j = 0; j < size; ++j) x[s[static_cast<std::size_t>(j)]] = coef[j];
      consider(x);
    });
  }
  return found;
}

AnalysisReport analyze(const Matrix& A, int k_star, const ThresholdingOperator& op,
                       const NormPair& norms, const EnumerationBudget& budget) {
  if (k_star < 1) throw ConfigError("true sparsity must be at least 1");
  AnalysisReport report;
  report.m = A.rows();
  report.n = A.cols();
  report.k_star = k_star;
  report.op = std::string(op.name());
  report.c1 = op.c1();
  report.c2 = op.c2();
  report.norms = norms;

  const NormalizedMatrix normalized = normalize_columns(A);
  if (((normalized.map.lambda_diag.array() - 1.0).abs() > kUnitColumnTol).any()) {
    report.notes.push_back("columns were normalized before analysis");
  }
  const Matrix& U = normalized.A;
  const Index n = U.cols();

  report.mu = n >= 2 ? coherence(U) : 0.0;

  const Index contraction_level = 3 * static_cast<Index>(k_star) + 1;
  const Index uniqueness_level = 2 * static_cast<Index>(k_star);
  for (Index r = 1; r <= std::min(contraction_level, n); ++r) {
    try {
      report.delta[r] = ric(U, r, budget);
    } catch (const BudgetExceeded& e) {
      report.notes.push_back(std::string("delta enumeration stopped: ") + e.what());
      break;
    }
  }
  auto delta_at = [&](Index level) -> std::optional<double> {
    const auto it = report.delta.find(std::min(level, n));
    if (it == report.delta.end()) return std::nullopt;
    return it->second;
  };
  if (contraction_level > n || uniqueness_level > n) {
    report.notes.push_back("levels above n use all columns");
  }

  std::vector<NormPair> pairs{NormPair::l1_linf(), NormPair::l2_l2()};
  if (std::find(pairs.begin(), pairs.end(), norms) == pairs.end()) pairs.push_back(norms);
  for (Index level : {uniqueness_level, contraction_level}) {
    for (const NormPair& pair : pairs) {
      try {
        report.beta.push_back({level, pair, gric(U, level, pair, budget)});
      } catch (const BudgetExceeded& e) {
        report.notes.push_back(std::string("beta enumeration skipped: ") + e.what());
      }
    }
  }
  auto beta_at = [&](Index level, const NormPair& pair) -> std::optional<GricValue> {
    for (const auto& entry : report.beta) {
      if (entry.k == level && entry.norms == pair) return entry.value;
    }
    return std::nullopt;
  };

  report.constants = contraction_constants(k_star, norms, op.c1(), op.c2());
  const double L = report.constants.L;

  const auto beta_unique_rip = beta_at(uniqueness_level, NormPair::l2_l2());
  const auto beta_unique_coh = beta_at(uniqueness_level, NormPair::l1_linf());
  report.conditions["unique_sparsest_rip"] =
      beta_unique_rip && check_uniqueness_condition(beta_unique_rip->value, k_star,
                                                    NormPair::l2_l2());
  report.conditions["unique_sparsest_coherence"] =
      beta_unique_coh && check_uniqueness_condition(beta_unique_coh->value, k_star,
                                                    NormPair::l1_linf());
  report.conditions["unique_sparsest"] = report.conditions["unique_sparsest_rip"] ||
                                         report.conditions["unique_sparsest_coherence"];

  const auto beta_contraction = beta_at(contraction_level, norms);
  bool gric_ok = false;
  if (beta_contraction) {
    report.beta_contraction = beta_contraction->value;
    gric_ok = beta_contraction->exact && beta_contraction->value < 1.0 / L;
    if (!beta_contraction->exact) {
      report.notes.push_back("beta at the report norm pair is a lower bound only; "
                             "the gric contraction condition is not certified");
    }
    if (gric_ok) {
      report.steps = step_interval(k_star, norms, beta_contraction->value, L);
      report.rate_at_unit_step = convergence_rate(1.0, k_star, norms,
                                                  beta_contraction->value, L);
    }
  }
  report.conditions["gric_contraction"] = gric_ok;

  const double coh_den = (3.0 - op.c2()) * k_star;
  report.conditions["coherence_contraction_strict"] = report.mu < 1.0 / coh_den;
  report.conditions["coherence_contraction_table_form"] =
      coh_den - 1.0 > 0.0 && report.mu < 1.0 / (coh_den - 1.0);

  const double L_rip = contraction_constants(k_star, NormPair::l2_l2(), op.c1(), op.c2()).L;
  const auto delta_c = delta_at(contraction_level);
  report.conditions["rip_contraction"] = delta_c && *delta_c < 1.0 / L_rip;
  report.conditions["hard_golden_ratio"] =
      op.kind() == OperatorKind::hard && delta_c && *delta_c < kGoldenThreshold;
  return report;
}

}  // namespace ait
