#include "ait/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ait/rng.hpp"

namespace ait {

namespace {

enum Stream : std::uint64_t { kMatrix = 0, kSupport = 1, kValues = 2, kNoise = 3 };

}  // namespace

SignalDist signal_dist_from_name(std::string_view name) {
  if (name == "gaussian") return SignalDist::gaussian;
  if (name == "binary") return SignalDist::binary;
  throw ConfigError("unknown signal distribution '" + std::string(name) +
                    "' (expected gaussian or binary)");
}

std::string_view signal_dist_name(SignalDist dist) {
  return dist == SignalDist::gaussian ? "gaussian" : "binary";
}

SnrReference snr_reference_from_name(std::string_view name) {
  if (name == "measurement") return SnrReference::measurement;
  if (name == "signal_entry") return SnrReference::signal_entry;
  throw ConfigError("unknown SNR reference '" + std::string(name) +
                    "' (expected measurement or signal_entry)");
}

std::string_view snr_reference_name(SnrReference ref) {
  return ref == SnrReference::measurement ? "measurement" : "signal_entry";
}

void ProblemSpec::validate() const {
  if (m < 1 || n < 1) throw ConfigError("m and n must be positive");
  if (k_star < 1 || k_star > std::min(m, n)) {
    throw ConfigError("k_star must lie in [1, min(m, n)]");
  }
  if (!(variance() > 0.0) || !std::isfinite(variance())) {
    throw ConfigError("matrix variance must be positive and finite");
  }
  if (snr_db && !std::isfinite(*snr_db)) throw ConfigError("snr_db must be finite");
}

Problem generate(const ProblemSpec& spec) {
  spec.validate();
  Problem p;

  CounterRng matrix_rng(derive_seed(spec.seed, kMatrix));
  const double sd = std::sqrt(spec.variance());
  p.A.resize(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) p.A(i, j) = sd * matrix_rng.normal();
  }

  // Partial Fisher-Yates: the first k_star slots are a uniform k-subset.
  CounterRng support_rng(derive_seed(spec.seed, kSupport));
  std::vector<Index> perm(static_cast<std::size_t>(spec.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < spec.k_star; ++i) {
    const auto j = i + static_cast<Index>(
                           support_rng.below(static_cast<std::uint64_t>(spec.n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  p.I_star.assign(perm.begin(), perm.begin() + spec.k_star);
  std::sort(p.I_star.begin(), p.I_star.end());

  CounterRng value_rng(derive_seed(spec.seed, kValues));
  p.x_star = Vector::Zero(spec.n);
  for (Index i : p.I_star) {
    double v = 0.0;
    if (spec.signal_dist == SignalDist::binary) {
      v = value_rng.sign();
    } else {
      do {
        v = value_rng.normal();
      } while (v == 0.0);
    }
    p.x_star[i] = v;
  }

  const Vector clean = p.A * p.x_star;
  p.epsilon = Vector::Zero(spec.m);
  if (spec.snr_db) {
    CounterRng noise_rng(derive_seed(spec.seed, kNoise));
    for (Index i = 0; i < spec.m; ++i) p.epsilon[i] = noise_rng.normal();
    const double ratio = std::pow(10.0, -*spec.snr_db / 20.0);
    if (spec.snr_reference == SnrReference::measurement) {
      p.epsilon *= ratio * clean.norm() / p.epsilon.norm();
    } else {
      const double rms = p.x_star.norm() / std::sqrt(static_cast<double>(spec.k_star));
      p.epsilon *= ratio * rms;
    }
  }
  p.b = clean + p.epsilon;
  return p;
}

double relative_error(const Vector& x_rec, const Vector& x_star, ErrorNorm norm) {
  if (x_rec.size() != x_star.size()) throw DimensionError("vector lengths differ");
  if (x_star.size() == 0 || x_star.isZero(0.0)) {
    throw DomainError("relative error needs a nonzero ground truth");
  }
  const Vector diff = x_rec - x_star;
  if (norm == ErrorNorm::l2) return diff.norm() / x_star.norm();
  return diff.cwiseAbs().maxCoeff() / x_star.cwiseAbs().maxCoeff();
}

bool is_success(const Vector& x_rec, const Vector& x_star) {
  return relative_error(x_rec, x_star, ErrorNorm::linf) <= kSuccessTolerance;
}

}  // namespace ait
