#include "manvb/kernels.hpp"

#include "manvb/errors.hpp"

#include <cmath>
#include <string>

namespace manvb::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr Eigen::Index kParallelThreshold = 1 << 14;

void check_logistic_shapes(const Matrix& x, const Vector& y, const Vector& beta) {
  if (x.rows() != y.size() || x.cols() != beta.size()) {
    throw DimensionError("logistic kernel: X is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", y has " + std::to_string(y.size()) +
                         ", beta has " + std::to_string(beta.size()));
  }
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::Serial ? "serial" : "openmp";
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LogisticTerms logistic_loglik_serial(const Matrix& x, const Vector& y, const Vector& beta) {
  check_logistic_shapes(x, y, beta);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  Vector resid(n);
  LogisticTerms out;
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) eta += x(i, j) * beta[j];
    out.loglik += y[i] * eta - softplus(eta);
    resid[i] = y[i] - logistic(eta);
  }
  out.grad.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += x(i, j) * resid[i];
    out.grad[j] = s;
  }
  return out;
}

LogisticTerms logistic_loglik_omp(const Matrix& x, const Vector& y, const Vector& beta) {
  check_logistic_shapes(x, y, beta);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  const bool parallel = n * m >= kParallelThreshold;
  Vector resid(n);
  Vector terms(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) eta += x(i, j) * beta[j];
    terms[i] = y[i] * eta - softplus(eta);
    resid[i] = y[i] - logistic(eta);
  }
  LogisticTerms out;
  for (Eigen::Index i = 0; i < n; ++i) out.loglik += terms[i];
  out.grad.resize(m);
#pragma omp parallel for schedule(static) if (parallel)
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += x(i, j) * resid[i];
    out.grad[j] = s;
  }
  return out;
}

LogisticTerms logistic_loglik(Backend backend, const Matrix& x, const Vector& y, const Vector& beta) {
  return backend == Backend::Serial ? logistic_loglik_serial(x, y, beta) : logistic_loglik_omp(x, y, beta);
}

Matrix weighted_gram_serial(const Matrix& a, const Vector& w) {
  if (a.rows() != w.size()) throw DimensionError("weighted_gram: weight length does not match rows");
  const Eigen::Index m = a.rows();
  const Eigen::Index p = a.cols();
  Matrix g(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index l = 0; l <= k; ++l) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) s += a(i, k) * w[i] * a(i, l);
      g(k, l) = s;
      g(l, k) = s;
    }
  }
  return g;
}

Matrix weighted_gram_omp(const Matrix& a, const Vector& w) {
  if (a.rows() != w.size()) throw DimensionError("weighted_gram: weight length does not match rows");
  const Eigen::Index m = a.rows();
  const Eigen::Index p = a.cols();
  const Eigen::Index entries = p * (p + 1) / 2;
  Matrix g(p, p);
  // One task per lower-triangle entry; each sum runs over i in order.
#pragma omp parallel for schedule(static) if (m * entries >= kParallelThreshold)
  for (Eigen::Index e = 0; e < entries; ++e) {
    Eigen::Index k = 0;
    while ((k + 1) * (k + 2) / 2 <= e) ++k;
    const Eigen::Index l = e - k * (k + 1) / 2;
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += a(i, k) * w[i] * a(i, l);
    g(k, l) = s;
    g(l, k) = s;
  }
  return g;
}

Matrix weighted_gram(Backend backend, const Matrix& a, const Vector& w) {
  return backend == Backend::Serial ? weighted_gram_serial(a, w) : weighted_gram_omp(a, w);
}

Vector rowwise_dot_serial(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("rowwise_dot: shape mismatch");
  Vector out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
    out[i] = s;
  }
  return out;
}

Vector rowwise_dot_omp(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("rowwise_dot: shape mismatch");
  Vector out(a.rows());
#pragma omp parallel for schedule(static) if (a.size() >= kParallelThreshold)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
    out[i] = s;
  }
  return out;
}

Vector rowwise_dot(Backend backend, const Matrix& a, const Matrix& b) {
  return backend == Backend::Serial ? rowwise_dot_serial(a, b) : rowwise_dot_omp(a, b);
}

Backend default_backend() { return Backend::OpenMP; }

}  // namespace manvb::kernels
