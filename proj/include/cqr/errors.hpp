#pragma once

#include <stdexcept>
#include <string>

namespace cqr {

/// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (z <= 0, xi < 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnknownSpecies : public Error {
 public:
  using Error::Error;
};

/// Landau-level sum did not settle below its tail tolerance before the hard cap.
class LandauSumNotConverged : public Error {
 public:
  LandauSumNotConverged(const std::string& what, double tail_estimate)
      : Error(what), tail_estimate_(tail_estimate) {}
  double tail_estimate() const noexcept { return tail_estimate_; }

 private:
  double tail_estimate_;
};

class DegenerateSheetResponse : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature exhausted its subdivision budget.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double error_estimate, double z = 0.0)
      : Error(what), error_estimate_(error_estimate), z_(z) {}
  double error_estimate() const noexcept { return error_estimate_; }
  /// Distance at which the failure happened, 0 when not applicable.
  double z() const noexcept { return z_; }

 private:
  double error_estimate_;
  double z_;
};

class NotRetardedRegime : public Error {
 public:
  using Error::Error;
};

class NoBadlandsRegion : public Error {
 public:
  using Error::Error;
};

/// ODE step size underflow while resolving the WKB phase.
class StiffOscillationFailure : public Error {
 public:
  StiffOscillationFailure(const std::string& what, double z) : Error(what), z_(z) {}
  double z() const noexcept { return z_; }

 private:
  double z_;
};

class UnitarityViolation : public Error {
 public:
  using Error::Error;
};

/// The domain loop needed z_i below the tabulated short-distance floor.
class ShortDistanceUnresolved : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised by the verification engines when their own refinement fails.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace cqr
