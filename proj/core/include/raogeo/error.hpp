#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace raogeo {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed request: unknown family, chart, method, generator or suite.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the open parameter domain of its chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sufficient statistic on the boundary of the expectation range.
class BoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Sample point outside the support of the family.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// A numeric procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Matrix failed a symmetry or positive-definiteness gate.
class DefinitenessError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Iterative solver (Newton, shooting) did not converge.
class SolverError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Integrated geodesic left the parameter domain at `exit_time`.
class GeodesicExitError : public SolverError {
 public:
  GeodesicExitError(const std::string& what, double exit_time)
      : SolverError(what, exit_time), exit_time_(exit_time) {}
  double exit_time() const noexcept { return exit_time_; }

 private:
  double exit_time_;
};

/// One or more Monte Carlo replicates threw.
class ReplicateFailure : public Error {
 public:
  ReplicateFailure(const std::string& what, std::vector<long> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<long>& indices() const noexcept { return indices_; }

 private:
  std::vector<long> indices_;
};

}  // namespace raogeo
