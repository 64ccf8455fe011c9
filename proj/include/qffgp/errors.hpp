#ifndef QFFGP_ERRORS_HPP
#define QFFGP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qffgp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Precondition or argument-domain violation (bad order, tolerance out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed convergence, and other numeric breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Failed matrix factorization; message carries the offending quantity.
class LinAlgError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Quadrature rule construction failed (node solver did not converge).
class RuleConstructionError : public NumericError {
 public:
  RuleConstructionError(int order, const std::string& what)
      : NumericError(what), order_(order) {}
  int order() const { return order_; }

 private:
  int order_;
};

/// ODE right-hand side evaluated outside its admissible region.
class OdeDomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Numerical integration failed; carries the time of failure.
class IntegrationError : public NumericError {
 public:
  IntegrationError(double time, const std::string& what)
      : NumericError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Hyperparameter fit failed on every start.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Optimizer hit a non-finite objective it could not recover from.
class OptimizerError : public Error {
 public:
  using Error::Error;
};

}  // namespace qffgp

#endif  // QFFGP_ERRORS_HPP
