#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace manvb {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Points or tangent vectors from incompatible geometries, or a violated
/// orthonormality / tangency invariant.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// B + U lost column rank, so the polar factor is not unique.
class DegenerateRetractionError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// The p x p capacitance matrix I + A^T D2^-2 A failed to factor.
class IllConditionedCovarianceError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value surfaced in a gradient or update. Carries the sample
/// point that produced it when one is known.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, Eigen::VectorXd theta = {})
      : Error(what), theta_(std::move(theta)) {}

  const Eigen::VectorXd& theta() const noexcept { return theta_; }

 private:
  Eigen::VectorXd theta_;
};

/// Invalid argument value (empty dataset, out-of-range hyperparameter, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A cross-validation fold ended up with a single label class.
class StratificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace manvb
