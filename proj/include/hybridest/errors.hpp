#pragma once

#include <stdexcept>

namespace hybridest {

/// Invalid argument values (out-of-range parameters, mismatched sums, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Incompatible matrix/vector dimensions.
class DimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Linear-algebra failures: non-convergence, singular or ill-conditioned solves.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad sweep configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hybridest
