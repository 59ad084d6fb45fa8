#pragma once

#include <stdexcept>
#include <string>

namespace rror {

// Broad failure classes. They map one-to-one onto the C API status codes and
// the CLI exit codes (input problems exit 2, estimation problems exit 1).
enum class ErrorKind {
  Input,       // malformed file, bad flag, invariant violation in supplied data
  Estimation,  // singular design, degenerate filter, non-ergodic chain, ...
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what)
      : Error(ErrorKind::Estimation, what) {}
};

// Design matrix (or weighted design) does not have full column rank.
class SingularDesignError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// e'e == 0: test statistics are undefined.
class ExactFitError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// A regime received (numerically) no smoothed probability mass.
class EmptyRegimeError : public EstimationError {
 public:
  EmptyRegimeError(int regime, const std::string& what)
      : EstimationError(what), regime_(regime) {}
  int regime() const noexcept { return regime_; }

 private:
  int regime_;
};

}  // namespace rror
