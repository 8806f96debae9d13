#pragma once

#include <stdexcept>
#include <string>

namespace su12 {

// Thrown when an input violates a precondition (non-posdef metric, bad grid, ...).
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver fails to converge; carries the iteration trace.
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace su12
