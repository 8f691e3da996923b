#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version. The OpenMP versions split work over output entries only
// and keep each reduction in serial order, so both produce bitwise-identical
// results for any thread count.

#include <Eigen/Dense>

#include <string_view>

namespace manvb::kernels {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Backend { Serial, OpenMP };

std::string_view to_string(Backend backend);

/// Numerically safe log(1 + exp(x)).
double softplus(double x);
/// Numerically safe 1 / (1 + exp(-x)).
double logistic(double x);

struct LogisticTerms {
  double loglik = 0.0;  // sum_i y_i eta_i - log(1 + exp(eta_i))
  Vector grad;          // X^T (y - sigmoid(X beta))
};

LogisticTerms logistic_loglik_serial(const Matrix& x, const Vector& y, const Vector& beta);
LogisticTerms logistic_loglik_omp(const Matrix& x, const Vector& y, const Vector& beta);
LogisticTerms logistic_loglik(Backend backend, const Matrix& x, const Vector& y, const Vector& beta);

/// A^T diag(w) A, the p x p Gram matrix of the rows of A weighted by w.
Matrix weighted_gram_serial(const Matrix& a, const Vector& w);
Matrix weighted_gram_omp(const Matrix& a, const Vector& w);
Matrix weighted_gram(Backend backend, const Matrix& a, const Vector& w);

/// out_i = <a.row(i), b.row(i)>.
Vector rowwise_dot_serial(const Matrix& a, const Matrix& b);
Vector rowwise_dot_omp(const Matrix& a, const Matrix& b);
Vector rowwise_dot(Backend backend, const Matrix& a, const Matrix& b);

/// Backend used by the library when the caller does not choose one.
Backend default_backend();

}  // namespace manvb::kernels
