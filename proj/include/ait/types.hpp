#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ait {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free set of column indices.
using Support = std::vector<Index>;

/// Input outside the mathematical domain of an operation (e.g. |u| <= tau for a
/// defining function, or a vector that must be nonzero).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A combinatorial enumeration would exceed its configured support budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A convergence hypothesis that a caller relies on could not be certified.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration (bad enum name, missing field, invalid value).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ait
