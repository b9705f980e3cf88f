#pragma once

#include <stdexcept>
#include <string>

namespace vilab {

/// Bad caller input (sizes, signs, ranges).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two objects were built over different meshes.
class MeshMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A mathematical hypothesis required by an operation was checked and found
/// violated. The message names the hypothesis.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to converge or hit a singular system.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iterations = -1, double residual = -1.0)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace vilab
