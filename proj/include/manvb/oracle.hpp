#pragma once

// Reference computations used to verify the fast paths: dense covariance
// assembly by explicit loops, dense log-determinants, and central finite
// differences. Nothing here calls the Woodbury routines or the analytic
// gradient code.

#include "manvb/factor_gaussian.hpp"
#include "manvb/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace manvb::oracle {

/// lambda without the manifold constraint, so that finite differences may
/// step off the manifold.
struct RawParams {
  Parameterization param = Parameterization::S;
  Vector mu;
  Matrix b;
  Vector d1;
  Vector d2;

  static RawParams from(const VariationalParams& lambda);
};

struct GradBlocks {
  Vector mu;
  Matrix b;
  Vector d1;
  Vector d2;
};

/// Sigma assembled entry by entry from its defining formula.
Matrix dense_sigma(const RawParams& raw);

/// log|det(M)| from an LU factorisation of the dense matrix.
double dense_log_det(const Matrix& m);

/// theta computed entry by entry.
Vector dense_theta(const RawParams& raw, const NoiseDraw& noise);

/// log h(theta) + 1/2 log|Sigma|, all dense.
double dense_elbo(const RawParams& raw, const Model& model, const NoiseDraw& noise);

/// Central differences of f at x with step h.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h);

/// Finite-difference gradients of the stochastic term log h(theta(lambda))
/// with frozen noise, of 1/2 log|Sigma|, and of their sum.
GradBlocks fd_grad_l1(const RawParams& raw, const Model& model, const NoiseDraw& noise, double h = 1e-5);
GradBlocks fd_grad_l2(const RawParams& raw, double h = 1e-5);
GradBlocks fd_grad_total(const RawParams& raw, const Model& model, const NoiseDraw& noise, double h = 1e-5);

/// ||a - ref||_F / max(||ref||_F, 1e-8).
double relative_error(const Matrix& a, const Matrix& ref);

/// One line of the gradient-check report.
struct CheckRow {
  std::string param;
  std::string block;  // mu, B, d1, d2
  std::string part;   // L1 (stochastic) or L2 (log-determinant)
  double max_rel_err = 0.0;
  double tol = 0.0;
  int instances = 0;
  bool pass = false;
};

inline constexpr double kL1Tol = 1e-5;
inline constexpr double kL2Tol = 1e-7;

/// Compares the analytic gradients against finite differences for every
/// parameterization and block over `instances` random configurations
/// (m <= 10, logistic model with n = 20, frozen noise).
std::vector<CheckRow> run_gradient_check(int instances, std::uint64_t seed);

/// Random lambda with m x p orthonormal B, mu ~ N(0, 0.25), |d1| in
/// [0.5, 1.5] with random sign, d2 in [0.3, 1].
VariationalParams random_lambda(Parameterization param, Index m, Index p, Rng& rng);

/// Random logistic dataset (standard-normal design with intercept, labels
/// drawn from a random coefficient vector).
Dataset random_logistic_data(Index n, Index m, Rng& rng);

}  // namespace manvb::oracle
