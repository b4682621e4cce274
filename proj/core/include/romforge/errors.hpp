#pragma once

#include <stdexcept>
#include <string>

namespace romforge {

// Error taxonomy mirrors the CLI exit codes: config 2, io 3, divergence 4,
// shape 5.  Anything else surfaces as std::runtime_error (exit 1).

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct shape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to meet its tolerance within the sweep cap.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

}  // namespace romforge
