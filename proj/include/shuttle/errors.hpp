#pragma once

#include <stdexcept>
#include <string>

namespace shuttle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter violates its precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain (e.g. t outside [0, T]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested time grid is too coarse for the noise or the trap period.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature or another iterative scheme failed to converge.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double estimate = 0.0, double error_bound = 0.0)
      : Error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// The Ermakov scaling factor reached rho <= 0.
class SingularState : public Error {
 public:
  SingularState(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// G1 - G2 does not change sign inside the search bracket.
class NoCrossing : public Error {
 public:
  using Error::Error;
};

}  // namespace shuttle
