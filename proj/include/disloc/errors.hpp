#pragma once

#include <stdexcept>
#include <string>

namespace disloc {

// Malformed input: bad schema, out-of-range parameter, unusable grid.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside the mathematical domain of an operation (t > 1, x0 > x1, ...).
class DomainError : public ValidationError {
 public:
  explicit DomainError(const std::string& what) : ValidationError(what) {}
};

// Input is well formed but the operation's precondition does not hold,
// e.g. an energy that is not inside a spectral gap.
class PreconditionError : public std::logic_error {
 public:
  explicit PreconditionError(const std::string& what) : std::logic_error(what) {}
};

// Numerical breakdown: zero pivot after retry, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace disloc
