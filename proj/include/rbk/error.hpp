#pragma once

#include <stdexcept>
#include <string>

namespace rbk {

/// Precondition violated by caller-supplied data (non-finite state,
/// nonpositive chart data, out-of-range dimension, empty support, ...).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// The numerics gave up: step budget exhausted, step size underflow,
/// non-finite state produced along the orbit.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A run configuration document failed to parse or validate.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rbk
