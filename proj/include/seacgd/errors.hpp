#pragma once

#include <stdexcept>
#include <string>

namespace seacgd {

// Caller broke a precondition (wrong dimension, empty block, negative norm).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad configuration: W > d, tau < W-1, unknown objective key, ...
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// eps outside the admissible regime eps <= L^2/rho.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// f(x0) - f* <= 0: nothing to descend.
class DegenerateProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace seacgd
