#pragma once

#include <stdexcept>
#include <string>

namespace airi {

/// Bad input: shapes, ranges, malformed files. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: non-finite values, degenerate operators. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace airi
