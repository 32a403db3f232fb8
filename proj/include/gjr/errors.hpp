#pragma once

#include <stdexcept>
#include <string>

namespace gjr {

// Bad arguments to a library call (programming or user error).
using InvalidArgument = std::invalid_argument;

// Unknown identifiers, unreadable or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, empty or degenerate input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: infeasible parameters, no root, optimizer failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Risk-neutral probabilities leave [0,1] on too many steps, or a local
// volatility turns non-positive.
class InfeasibleModel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoSolution : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gjr
