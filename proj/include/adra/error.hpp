#pragma once

#include <stdexcept>
#include <string>

namespace adra {

// Malformed or out-of-range inputs (configs, probabilities, CLI values).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A function evaluated outside its mathematical domain, e.g. g(q) at q <= 0.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Root bracketing or iterative convergence failed.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing an output/manifest file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adra
