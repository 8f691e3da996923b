#pragma once

// Gaussian variational family q(theta) = N(mu, Sigma) with factor covariance
//
//   S   Sigma = B D1^2 B^T + D2^2    B on the Stiefel manifold, d1 in R^p
//   G1  Sigma = B B^T + D2^2         B on the Grassmann manifold, no d1
//   G2  Sigma = D1 B B^T D1 + D2^2   B on the Grassmann manifold, d1 in R^m
//
// In every case Sigma = A A^T + D2^2 for an m x p loading matrix A, which is
// what the Woodbury and determinant-lemma routines below work with.

#include "manvb/kernels.hpp"
#include "manvb/manifold.hpp"
#include "manvb/model.hpp"

#include <optional>
#include <string_view>

namespace manvb {

enum class Parameterization { S, G1, G2 };

std::string_view to_string(Parameterization param);
std::optional<Parameterization> parse_parameterization(std::string_view text);

/// Manifold on which B lives for a parameterization.
ManifoldKind manifold_for(Parameterization param);

/// Length of d1: p for S, m for G2, 0 for G1.
Index d1_length(Parameterization param, Index m, Index p);

/// Lower bound on |d2_i|; Sigma must stay invertible.
inline constexpr double kD2Floor = 1e-8;

/// Pushes entries with |v_i| < floor out to +-floor (zero goes to +floor).
Vector clamp_to_floor(Vector v, double floor = kD2Floor);

/// lambda = {mu, B, d1, d2}. d1 and d2 are unconstrained reals; only their
/// squares enter Sigma.
class VariationalParams {
 public:
  /// Throws DimensionError on inconsistent sizes, GeometryError when B's
  /// manifold does not match the parameterization (a Euclidean B is accepted
  /// for the unconstrained baseline), and DomainError when |d2_i| < kD2Floor.
  VariationalParams(Parameterization param, Vector mu, ManifoldPoint b, Vector d1, Vector d2);

  Parameterization param() const noexcept { return param_; }
  const Vector& mu() const noexcept { return mu_; }
  const ManifoldPoint& b() const noexcept { return b_; }
  const Vector& d1() const noexcept { return d1_; }
  const Vector& d2() const noexcept { return d2_; }
  Index dim() const noexcept { return mu_.size(); }
  Index factors() const noexcept { return b_.cols(); }

 private:
  Parameterization param_;
  Vector mu_;
  ManifoldPoint b_;
  Vector d1_;
  Vector d2_;
};

/// Raw standard-normal draws (z in R^p, eps in R^m).
struct NoiseDraw {
  Vector z;
  Vector eps;

  static NoiseDraw sample(Index m, Index p, Rng& rng);
  static NoiseDraw zero(Index m, Index p);
};

/// The loading matrix A with Sigma = A A^T + D2^2.
Matrix loading_matrix(const VariationalParams& lambda);

/// Low-rank-plus-diagonal covariance prepared for repeated solves. Holds
/// A, D2^-2 and the Cholesky factor of the p x p capacitance matrix
/// K = I + A^T D2^-2 A. Nothing m x m is ever formed.
class LowRankCovariance {
 public:
  explicit LowRankCovariance(const VariationalParams& lambda,
                             kernels::Backend backend = kernels::default_backend());
  /// Direct construction from a loading matrix and the diagonal d2.
  LowRankCovariance(Matrix loading, const Vector& d2, kernels::Backend backend = kernels::default_backend());

  /// log|Sigma| = log|K| + sum_i log d2_i^2.
  double log_det() const;

  /// Sigma^{-1} V for an m x k matrix V.
  Matrix inverse_apply(const Matrix& v) const;

  /// diag(Sigma^{-1}) in O(m p^2).
  Vector inverse_diag() const;

  const Matrix& loading() const noexcept { return a_; }
  const Vector& inv_d2_sq() const noexcept { return inv_d2_sq_; }

 private:
  void factor();

  Matrix a_;
  Vector inv_d2_sq_;
  Vector log_d2_sq_;
  Eigen::LLT<Matrix> capacitance_;
  kernels::Backend backend_;
};

/// theta = mu + A z + d2 o eps for the parameterization's loading.
Vector sample_theta(const VariationalParams& lambda, const NoiseDraw& noise);

/// Dense m x m Sigma. Test and small-m use only.
Matrix cov_matrix(const VariationalParams& lambda);

/// log|Sigma| via the matrix determinant lemma. Throws
/// IllConditionedCovarianceError if the capacitance matrix does not factor.
double log_det_sigma(const VariationalParams& lambda);

/// Sigma^{-1} V via the Woodbury identity.
Matrix sigma_inverse_apply(const VariationalParams& lambda, const Matrix& v);

/// Single-draw estimate log h(theta) + 1/2 log|Sigma| of the lower bound,
/// without the constant -(m/2)(log 2 pi + 1). Throws NumericalError when
/// log h is not finite.
double elbo_estimate(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise);

}  // namespace manvb
