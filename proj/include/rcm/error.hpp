#pragma once

#include <stdexcept>
#include <string>

namespace rcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where an operation is defined
/// (missing vertex, non-positive time, singular matrix, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid law parameters, inadmissible exponents, bad run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed environment file or report.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A solver did not meet its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Too much mass left the ambient box; the caller should enlarge it.
class TruncationError : public SolverError {
 public:
  TruncationError(const std::string& what, double leak)
      : SolverError(what), leak_(leak) {}
  double leak() const noexcept { return leak_; }

 private:
  double leak_;
};

}  // namespace rcm
