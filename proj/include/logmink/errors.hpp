#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logmink {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input spans fewer than three dimensions (coplanar hull, flat body).
class DimensionDeficient : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// W = Hess h + h I lost positive definiteness (or h dropped below the floor).
class ConvexityError : public Error {
 public:
  ConvexityError(const std::string& what, std::size_t node, double min_eigenvalue)
      : Error(what + " (node " + std::to_string(node) + ", min eigenvalue " +
              std::to_string(min_eigenvalue) + ")"),
        node_(node),
        min_eigenvalue_(min_eigenvalue) {}

  std::size_t node() const noexcept { return node_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  std::size_t node_;
  double min_eigenvalue_;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual, int iterations)
      : Error(what + " (residual " + std::to_string(last_residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        last_residual_(last_residual),
        iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class StepFailure : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace logmink
