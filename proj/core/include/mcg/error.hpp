#pragma once

#include <stdexcept>
#include <string>

namespace mcg {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, bad header, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The filesystem failed us: missing file, short read, failed write.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument violates a precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mcg
