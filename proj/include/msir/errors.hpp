#pragma once

#include <stdexcept>
#include <string>

namespace msir {

// Input that violates a documented precondition (bad shape, non-SPD matrix,
// malformed file). The CLI maps these to exit code 2.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative routine failed to converge or met a numerically degenerate case.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msir
