#pragma once

#include <stdexcept>
#include <string>

namespace viscowave {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Derivative requested where it does not exist (e.g. stretched kernels at t = 0).
class SingularDerivativeError : public DomainError {
 public:
  explicit SingularDerivativeError(const std::string& msg) : DomainError(msg) {}
};

/// Kernel whose tail integral diverges.
class NonIntegrableError : public DomainError {
 public:
  explicit NonIntegrableError(const std::string& msg) : DomainError(msg) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class UnsupportedStrategyError : public Error {
 public:
  explicit UnsupportedStrategyError(const std::string& msg) : Error(msg) {}
};

/// Non-finite or runaway solution values during time stepping.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& msg, long step) : NumericalError(msg), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

}  // namespace viscowave
