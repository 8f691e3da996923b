#include "manvb/model.hpp"

#include "manvb/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace manvb {

namespace {

// log of the half-Cauchy(0, 1) density at s = exp(u), plus the log-Jacobian u:
//   log(2/pi) - log(1 + exp(2u)) + u
double log_half_cauchy_of_exp(double u) {
  return std::log(2.0 / std::numbers::pi) - kernels::softplus(2.0 * u) + u;
}

// d/du of the above: 1 - 2 sigmoid(2u).
double d_log_half_cauchy_of_exp(double u) { return 1.0 - 2.0 * kernels::logistic(2.0 * u); }

}  // namespace

LogDensity logistic_gaussian_log_h(const Dataset& data, double prior_sd, const Eigen::VectorXd& theta,
                                   kernels::Backend backend) {
  if (!(prior_sd > 0.0)) throw DomainError("prior_sd must be positive");
  auto terms = kernels::logistic_loglik(backend, data.x, data.y, theta);
  const double prec = 1.0 / (prior_sd * prior_sd);
  LogDensity out;
  out.value = terms.loglik - 0.5 * prec * theta.squaredNorm();
  out.grad = std::move(terms.grad) - prec * theta;
  return out;
}

LogDensity logistic_horseshoe_log_h(const Dataset& data, const Eigen::VectorXd& theta_aug,
                                    kernels::Backend backend) {
  const Eigen::Index m = data.m();
  if (theta_aug.size() != 2 * m + 1) {
    throw DimensionError("horseshoe: theta must have length 2m+1 = " + std::to_string(2 * m + 1) +
                         ", got " + std::to_string(theta_aug.size()));
  }
  const auto beta = theta_aug.head(m);
  const auto kappa = theta_aug.segment(m, m);
  const double omega = theta_aug[2 * m];

  auto terms = kernels::logistic_loglik(backend, data.x, data.y, beta);

  LogDensity out;
  out.grad.resize(2 * m + 1);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double value = terms.loglik;
  double d_omega = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    // beta_j ~ N(0, exp(2 (kappa_j + omega))), variance handled in log space.
    const double log_scale = kappa[j] + omega;
    const double scaled_sq = beta[j] * beta[j] * std::exp(-2.0 * log_scale);
    value += -half_log_2pi - log_scale - 0.5 * scaled_sq;
    value += log_half_cauchy_of_exp(kappa[j]);

    out.grad[j] = terms.grad[j] - beta[j] * std::exp(-2.0 * log_scale);
    out.grad[m + j] = scaled_sq - 1.0 + d_log_half_cauchy_of_exp(kappa[j]);
    d_omega += scaled_sq - 1.0;
  }
  value += log_half_cauchy_of_exp(omega);
  out.grad[2 * m] = d_omega + d_log_half_cauchy_of_exp(omega);
  out.value = value;
  return out;
}

LogDensity gaussian_target_log_h(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0,
                                 const Eigen::VectorXd& theta) {
  return GaussianTargetModel(mu0, sigma0).evaluate(theta);
}

LogisticGaussianModel::LogisticGaussianModel(std::shared_ptr<const Dataset> data, double prior_sd,
                                             kernels::Backend backend)
    : data_(std::move(data)), prior_sd_(prior_sd), backend_(backend) {
  if (!data_) throw DomainError("model needs a dataset");
  data_->validate();
  if (!(prior_sd_ > 0.0)) throw DomainError("prior_sd must be positive");
}

LogDensity LogisticGaussianModel::evaluate(const Eigen::VectorXd& theta) const {
  return logistic_gaussian_log_h(*data_, prior_sd_, theta, backend_);
}

LogisticHorseshoeModel::LogisticHorseshoeModel(std::shared_ptr<const Dataset> data, kernels::Backend backend)
    : data_(std::move(data)), backend_(backend) {
  if (!data_) throw DomainError("model needs a dataset");
  data_->validate();
}

LogDensity LogisticHorseshoeModel::evaluate(const Eigen::VectorXd& theta) const {
  return logistic_horseshoe_log_h(*data_, theta, backend_);
}

GaussianTargetModel::GaussianTargetModel(Eigen::VectorXd mu0, Eigen::MatrixXd sigma0)
    : mu0_(std::move(mu0)), sigma0_(std::move(sigma0)), chol_(sigma0_) {
  if (sigma0_.rows() != mu0_.size() || sigma0_.cols() != mu0_.size()) {
    throw DimensionError("gaussian target: covariance must be m x m");
  }
  if (chol_.info() != Eigen::Success) throw DomainError("gaussian target: covariance is not SPD");
}

LogDensity GaussianTargetModel::evaluate(const Eigen::VectorXd& theta) const {
  if (theta.size() != mu0_.size()) throw DimensionError("gaussian target: theta has wrong length");
  const Eigen::VectorXd diff = theta - mu0_;
  LogDensity out;
  out.grad = -chol_.solve(diff);
  out.value = 0.5 * diff.dot(out.grad);
  return out;
}

double predict_error(const Dataset& data, const Eigen::VectorXd& mu) {
  if (data.n() < 1) throw DomainError("predict_error: empty dataset");
  if (mu.size() < data.m()) throw DimensionError("predict_error: mean shorter than the feature count");
  const Eigen::VectorXd eta = data.x * mu.head(data.m());
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    // sigmoid(eta) >= 1/2 exactly when eta >= 0; ties predict class 1.
    const double predicted = eta[i] >= 0.0 ? 1.0 : 0.0;
    if (predicted != data.y[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.n());
}

double predict_error_averaged(const Dataset& data, const Eigen::MatrixXd& beta_draws) {
  if (data.n() < 1) throw DomainError("predict_error: empty dataset");
  if (beta_draws.rows() < data.m() || beta_draws.cols() < 1) {
    throw DimensionError("predict_error: draws must have at least m rows and one column");
  }
  const Eigen::MatrixXd eta = data.x * beta_draws.topRows(data.m());
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double prob = 0.0;
    for (Eigen::Index k = 0; k < eta.cols(); ++k) prob += kernels::logistic(eta(i, k));
    prob /= static_cast<double>(eta.cols());
    const double predicted = prob >= 0.5 ? 1.0 : 0.0;
    if (predicted != data.y[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.n());
}

}  // namespace manvb
