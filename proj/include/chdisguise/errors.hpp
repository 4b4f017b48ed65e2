#pragma once

#include <stdexcept>
#include <string>

namespace chdisguise {

/// Malformed or out-of-contract input (bad dimensions, probabilities out of
/// range, non-Hermitian matrices, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace chdisguise
