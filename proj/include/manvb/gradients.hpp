#pragma once

// Euclidean gradients of the lower bound L = L1 + L2 with
//   L1 = E_f[log h(theta(lambda; z, eps))]   (estimated from one draw)
//   L2 = 1/2 log|Sigma|                       (exact)
//
// Sign convention: every gradient here is the ascent direction of L, and
// every optimizer in this library adds it with a positive step.

#include "manvb/factor_gaussian.hpp"
#include "manvb/model.hpp"

namespace manvb {

struct EuclideanGrad {
  Vector mu;
  Matrix b;
  Vector d1;  // empty for G1
  Vector d2;

  static EuclideanGrad zeros_like(const VariationalParams& lambda);

  EuclideanGrad& operator+=(const EuclideanGrad& other);
  EuclideanGrad& operator*=(double alpha);

  bool all_finite() const;
};

EuclideanGrad operator+(EuclideanGrad a, const EuclideanGrad& b);

/// Stochastic L1 gradient from one noise draw. Evaluates the model once at
/// theta = sample_theta(lambda, noise). Throws NumericalError (with theta
/// attached) when the model gradient is not finite.
EuclideanGrad grad_l1(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise);

/// Same, given an already-evaluated model gradient g = grad log h(theta).
EuclideanGrad grad_l1(const VariationalParams& lambda, const Vector& model_grad, const NoiseDraw& noise);

/// Exact gradient of 1/2 log|Sigma| (g_mu = 0).
EuclideanGrad grad_l2(const VariationalParams& lambda);
EuclideanGrad grad_l2(const VariationalParams& lambda, const LowRankCovariance& cov);

/// grad_l1 + grad_l2.
EuclideanGrad grad_total(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise);

}  // namespace manvb
