#pragma once

// Target densities h(theta) = p(theta) p(y | theta), evaluated up to an
// additive constant together with their gradients.

#include "manvb/dataset.hpp"
#include "manvb/kernels.hpp"

#include <Eigen/Dense>

#include <memory>

namespace manvb {

struct LogDensity {
  double value = 0.0;
  Eigen::VectorXd grad;
};

class Model {
 public:
  virtual ~Model() = default;

  /// Length of theta.
  virtual Eigen::Index dim() const = 0;

  /// Number of leading theta coordinates that are regression coefficients
  /// (used for prediction). Equals dim() unless the model augments theta.
  virtual Eigen::Index coefficient_count() const { return dim(); }

  virtual LogDensity evaluate(const Eigen::VectorXd& theta) const = 0;

  double log_h(const Eigen::VectorXd& theta) const { return evaluate(theta).value; }
  Eigen::VectorXd grad_log_h(const Eigen::VectorXd& theta) const { return evaluate(theta).grad; }
};

/// Logistic likelihood with an N(0, prior_sd^2 I) prior on every coefficient.
/// The prior's normalising constant is dropped.
LogDensity logistic_gaussian_log_h(const Dataset& data, double prior_sd, const Eigen::VectorXd& theta,
                                   kernels::Backend backend = kernels::default_backend());

/// Logistic likelihood with a horseshoe prior in log-scale coordinates.
/// theta_aug = (beta[0..m), kappa[0..m), omega) with local scales
/// exp(kappa_j), global scale exp(omega), and half-Cauchy(0, 1) priors on
/// both scales (including the log-Jacobian of the exp transform).
LogDensity logistic_horseshoe_log_h(const Dataset& data, const Eigen::VectorXd& theta_aug,
                                    kernels::Backend backend = kernels::default_backend());

/// log N(theta | mu0, sigma0) without the normalising constant.
LogDensity gaussian_target_log_h(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0,
                                 const Eigen::VectorXd& theta);

class LogisticGaussianModel final : public Model {
 public:
  LogisticGaussianModel(std::shared_ptr<const Dataset> data, double prior_sd,
                        kernels::Backend backend = kernels::default_backend());

  Eigen::Index dim() const override { return data_->m(); }
  LogDensity evaluate(const Eigen::VectorXd& theta) const override;

  const Dataset& data() const noexcept { return *data_; }
  double prior_sd() const noexcept { return prior_sd_; }

 private:
  std::shared_ptr<const Dataset> data_;
  double prior_sd_;
  kernels::Backend backend_;
};

class LogisticHorseshoeModel final : public Model {
 public:
  explicit LogisticHorseshoeModel(std::shared_ptr<const Dataset> data,
                                  kernels::Backend backend = kernels::default_backend());

  Eigen::Index dim() const override { return 2 * data_->m() + 1; }
  Eigen::Index coefficient_count() const override { return data_->m(); }
  LogDensity evaluate(const Eigen::VectorXd& theta) const override;

  const Dataset& data() const noexcept { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
  kernels::Backend backend_;
};

/// Gaussian target with known mean and covariance; the exact variational
/// optimum is available in closed form.
class GaussianTargetModel final : public Model {
 public:
  GaussianTargetModel(Eigen::VectorXd mu0, Eigen::MatrixXd sigma0);

  Eigen::Index dim() const override { return mu0_.size(); }
  LogDensity evaluate(const Eigen::VectorXd& theta) const override;

  const Eigen::VectorXd& mean() const noexcept { return mu0_; }
  const Eigen::MatrixXd& covariance() const noexcept { return sigma0_; }

 private:
  Eigen::VectorXd mu0_;
  Eigen::MatrixXd sigma0_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
};

/// Misclassification rate of the plug-in rule sigmoid(x^T mu) >= 1/2.
/// Only the first data.m() entries of mu are used. Throws DomainError on an
/// empty dataset.
double predict_error(const Dataset& data, const Eigen::VectorXd& mu);

/// Misclassification rate when predicting with the average of
/// sigmoid(x^T beta_k) over the supplied coefficient draws (one per column).
double predict_error_averaged(const Dataset& data, const Eigen::MatrixXd& beta_draws);

}  // namespace manvb
