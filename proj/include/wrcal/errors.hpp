#pragma once

#include <stdexcept>
#include <string>

namespace wrcal {

// Invalid user-supplied configuration (bad flag values, incompatible method
// and prior combinations). The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (incomplete matrices, bad labels,
// duplicate records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |q0 + q1 - 1| is within the degeneracy guard, so the accuracy inversion
// has no usable denominator.
class DegenerateDenominatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Every sampling attempt was rejected; no win-rate estimate exists.
class UnestimableError : public std::runtime_error {
 public:
  UnestimableError(const std::string& what, double rejected_fraction)
      : std::runtime_error(what), rejected_fraction_(rejected_fraction) {}

  double rejected_fraction() const noexcept { return rejected_fraction_; }

 private:
  double rejected_fraction_;
};

}  // namespace wrcal
