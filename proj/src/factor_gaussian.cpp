#include "manvb/factor_gaussian.hpp"

#include <cmath>
#include <string>

namespace manvb {

std::string_view to_string(Parameterization param) {
  switch (param) {
    case Parameterization::S:
      return "S";
    case Parameterization::G1:
      return "G1";
    case Parameterization::G2:
      return "G2";
  }
  return "?";
}

std::optional<Parameterization> parse_parameterization(std::string_view text) {
  if (text == "S" || text == "s") return Parameterization::S;
  if (text == "G1" || text == "g1") return Parameterization::G1;
  if (text == "G2" || text == "g2") return Parameterization::G2;
  return std::nullopt;
}

ManifoldKind manifold_for(Parameterization param) {
  return param == Parameterization::S ? ManifoldKind::Stiefel : ManifoldKind::Grassmann;
}

Index d1_length(Parameterization param, Index m, Index p) {
  switch (param) {
    case Parameterization::S:
      return p;
    case Parameterization::G1:
      return 0;
    case Parameterization::G2:
      return m;
  }
  return 0;
}

Vector clamp_to_floor(Vector v, double floor) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) < floor) v[i] = v[i] < 0.0 ? -floor : floor;
  }
  return v;
}

VariationalParams::VariationalParams(Parameterization param, Vector mu, ManifoldPoint b, Vector d1, Vector d2)
    : param_(param), mu_(std::move(mu)), b_(std::move(b)), d1_(std::move(d1)), d2_(std::move(d2)) {
  const Index m = mu_.size();
  const Index p = b_.cols();
  if (b_.rows() != m) {
    throw DimensionError("variational params: B has " + std::to_string(b_.rows()) + " rows, mu has " +
                         std::to_string(m));
  }
  if (d1_.size() != d1_length(param_, m, p)) {
    throw DimensionError("variational params: d1 must have length " +
                         std::to_string(d1_length(param_, m, p)) + " for " + std::string(to_string(param_)));
  }
  if (d2_.size() != m) throw DimensionError("variational params: d2 must have length m");
  if (b_.kind() != ManifoldKind::Euclidean && b_.kind() != manifold_for(param_)) {
    throw GeometryError("variational params: " + std::string(to_string(param_)) + " needs B on the " +
                        std::string(to_string(manifold_for(param_))) + " manifold");
  }
  if (!mu_.allFinite() || !d1_.allFinite() || !d2_.allFinite()) {
    throw NumericalError("variational params: non-finite entries");
  }
  if (d2_.size() > 0 && !(d2_.cwiseAbs().minCoeff() >= kD2Floor)) {
    throw DomainError("variational params: |d2_i| below the floor");
  }
}

NoiseDraw NoiseDraw::sample(Index m, Index p, Rng& rng) {
  std::normal_distribution<double> normal;
  NoiseDraw out{Vector(p), Vector(m)};
  for (Index i = 0; i < p; ++i) out.z[i] = normal(rng);
  for (Index i = 0; i < m; ++i) out.eps[i] = normal(rng);
  return out;
}

NoiseDraw NoiseDraw::zero(Index m, Index p) { return {Vector::Zero(p), Vector::Zero(m)}; }

Matrix loading_matrix(const VariationalParams& lambda) {
  const Matrix& b = lambda.b().matrix();
  switch (lambda.param()) {
    case Parameterization::S:
      return b * lambda.d1().asDiagonal();
    case Parameterization::G1:
      return b;
    case Parameterization::G2:
      return lambda.d1().asDiagonal() * b;
  }
  return b;
}

LowRankCovariance::LowRankCovariance(const VariationalParams& lambda, kernels::Backend backend)
    : LowRankCovariance(loading_matrix(lambda), lambda.d2(), backend) {}

LowRankCovariance::LowRankCovariance(Matrix loading, const Vector& d2, kernels::Backend backend)
    : a_(std::move(loading)), backend_(backend) {
  if (a_.rows() != d2.size()) throw DimensionError("low-rank covariance: loading and d2 disagree on m");
  const Vector d2_sq = d2.array().square();
  inv_d2_sq_ = d2_sq.cwiseInverse();
  log_d2_sq_ = d2_sq.array().log();
  factor();
}

void LowRankCovariance::factor() {
  const Index p = a_.cols();
  Matrix k = kernels::weighted_gram(backend_, a_, inv_d2_sq_);
  k.diagonal().array() += 1.0;
  capacitance_.compute(k);
  if (capacitance_.info() != Eigen::Success || !k.allFinite()) {
    throw IllConditionedCovarianceError("capacitance matrix I + A^T D2^-2 A is not positive definite");
  }
  const auto& l = capacitance_.matrixLLT();
  for (Index i = 0; i < p; ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw IllConditionedCovarianceError("capacitance factor has a non-positive pivot");
    }
  }
}

double LowRankCovariance::log_det() const {
  const auto& l = capacitance_.matrixLLT();
  double log_det_k = 0.0;
  for (Index i = 0; i < l.rows(); ++i) log_det_k += 2.0 * std::log(l(i, i));
  return log_det_k + log_d2_sq_.sum();
}

Matrix LowRankCovariance::inverse_apply(const Matrix& v) const {
  if (v.rows() != a_.rows()) throw DimensionError("inverse_apply: V must have m rows");
  // D^-2 V - D^-2 A K^-1 A^T D^-2 V
  const Matrix scaled = inv_d2_sq_.asDiagonal() * v;
  const Matrix inner = capacitance_.solve(a_.transpose() * scaled);
  return scaled - inv_d2_sq_.asDiagonal() * (a_ * inner);
}

Vector LowRankCovariance::inverse_diag() const {
  // (W K^-1 W^T)_ii = ||L^-1 w_i||^2 with W = D^-2 A and K = L L^T.
  const Matrix w_t = a_.transpose() * inv_d2_sq_.asDiagonal();
  const Matrix solved = capacitance_.matrixL().solve(w_t);
  const Matrix rows = solved.transpose();
  return inv_d2_sq_ - kernels::rowwise_dot(backend_, rows, rows);
}

Vector sample_theta(const VariationalParams& lambda, const NoiseDraw& noise) {
  const Index m = lambda.dim();
  const Index p = lambda.factors();
  if (noise.z.size() != p || noise.eps.size() != m) {
    throw DimensionError("sample_theta: noise must have z in R^p and eps in R^m");
  }
  const Matrix& b = lambda.b().matrix();
  Vector theta = lambda.mu() + lambda.d2().cwiseProduct(noise.eps);
  switch (lambda.param()) {
    case Parameterization::S:
      theta += b * lambda.d1().cwiseProduct(noise.z);
      break;
    case Parameterization::G1:
      theta += b * noise.z;
      break;
    case Parameterization::G2:
      theta += lambda.d1().cwiseProduct(b * noise.z);
      break;
  }
  return theta;
}

Matrix cov_matrix(const VariationalParams& lambda) {
  const Matrix a = loading_matrix(lambda);
  Matrix sigma = a * a.transpose();
  sigma.diagonal() += lambda.d2().array().square().matrix();
  return sigma;
}

double log_det_sigma(const VariationalParams& lambda) { return LowRankCovariance(lambda).log_det(); }

Matrix sigma_inverse_apply(const VariationalParams& lambda, const Matrix& v) {
  return LowRankCovariance(lambda).inverse_apply(v);
}

double elbo_estimate(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise) {
  const Vector theta = sample_theta(lambda, noise);
  const double log_h = model.log_h(theta);
  if (!std::isfinite(log_h)) throw NumericalError("log h is not finite", theta);
  return log_h + 0.5 * log_det_sigma(lambda);
}

}  // namespace manvb
