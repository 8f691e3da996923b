#pragma once

// Geometry of the Stiefel and Grassmann manifolds, both represented by m x p
// matrices with orthonormal columns:
//
//            tangent space          projection            retraction
//   Stiefel  sym(B^T U) = 0         Z - B sym(B^T Z)      (B + U)(I + U^T U)^{-1/2}
//   Grassmann  B^T U = 0            Z - B (B^T Z)         polar(B + U)
//
// Vector transport between two points is projection at the destination.
//
// A third kind, Euclidean, is the unconstrained reference geometry used by
// the baseline mode: projection and transport are identities and the
// retraction is plain addition.

#include "manvb/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace manvb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

enum class ManifoldKind { Stiefel, Grassmann, Euclidean };

std::string_view to_string(ManifoldKind kind);

/// Orthonormality tolerance enforced when a point is constructed from user data.
inline constexpr double kOrthTol = 1e-10;
/// Looser bound for points produced by long chains of retractions.
inline constexpr double kDriftTol = 1e-8;
/// Tangency tolerance, relative to max(1, ||U||_F).
inline constexpr double kTangentTol = 1e-9;

/// ||B^T B - I||_F.
double orth_residual(const Matrix& b);

/// Smallest singular value of b.
double sigma_min(const Matrix& b);

class ManifoldPoint {
 public:
  /// Throws DimensionError unless 1 <= p <= m, and GeometryError when the
  /// columns are not orthonormal to `tol` (Euclidean points are unchecked).
  ManifoldPoint(Matrix b, ManifoldKind kind, double tol = kOrthTol);

  const Matrix& matrix() const noexcept { return b_; }
  ManifoldKind kind() const noexcept { return kind_; }
  Index rows() const noexcept { return b_.rows(); }
  Index cols() const noexcept { return b_.cols(); }

  /// Same kind, shape and (bitwise) coordinates.
  bool same_as(const ManifoldPoint& other) const;

 private:
  Matrix b_;
  ManifoldKind kind_;
};

class TangentVector {
 public:
  /// Throws DimensionError on shape mismatch and GeometryError when `u` is
  /// not tangent at `base`.
  TangentVector(ManifoldPoint base, Matrix u);

  /// The zero vector at `base`.
  static TangentVector zero(const ManifoldPoint& base);

  const Matrix& matrix() const noexcept { return u_; }
  const ManifoldPoint& base() const noexcept { return base_; }

 private:
  struct Unchecked {};
  TangentVector(ManifoldPoint base, Matrix u, Unchecked);

  ManifoldPoint base_;
  Matrix u_;

  friend TangentVector project(const ManifoldPoint&, const Matrix&);
  friend TangentVector scaled(const TangentVector&, double);
  friend TangentVector combine(double, const TangentVector&, double, const TangentVector&);
};

/// Residual of the tangent-space constraint: ||sym(B^T U)||_F for Stiefel,
/// ||B^T U||_F for Grassmann, 0 for Euclidean.
double tangent_residual(const ManifoldPoint& b, const Matrix& u);

/// Orthogonal projection of an ambient matrix onto the tangent space at b.
TangentVector project(const ManifoldPoint& b, const Matrix& z);

/// Retraction of a tangent vector back onto the manifold.
ManifoldPoint retract(const ManifoldPoint& b, const TangentVector& u);

/// Vector transport from `from` to `to`, realised as projection at `to`.
TangentVector transport(const ManifoldPoint& from, const ManifoldPoint& to, const TangentVector& u);

/// alpha * u, staying at the same base point.
TangentVector scaled(const TangentVector& u, double alpha);

/// a * u + b * v for two vectors at the same base point.
TangentVector combine(double a, const TangentVector& u, double b, const TangentVector& v);

/// Thin QR of an m x p standard-normal draw, columns sign-flipped so that
/// diag(R) >= 0. Deterministic given the generator state.
ManifoldPoint random_point(Index m, Index p, ManifoldKind kind, Rng& rng);

/// Thin-QR orthonormalisation of an arbitrary full-column-rank matrix with
/// the same sign convention as random_point.
Matrix orthonormalize(const Matrix& a);

}  // namespace manvb
