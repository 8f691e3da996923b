#include "manvb/gradients.hpp"

#include "manvb/errors.hpp"

namespace manvb {

EuclideanGrad EuclideanGrad::zeros_like(const VariationalParams& lambda) {
  const Index m = lambda.dim();
  const Index p = lambda.factors();
  return {Vector::Zero(m), Matrix::Zero(m, p), Vector::Zero(lambda.d1().size()), Vector::Zero(m)};
}

EuclideanGrad& EuclideanGrad::operator+=(const EuclideanGrad& other) {
  if (mu.size() != other.mu.size() || b.rows() != other.b.rows() || b.cols() != other.b.cols() ||
      d1.size() != other.d1.size() || d2.size() != other.d2.size()) {
    throw DimensionError("gradient sum: shape mismatch");
  }
  mu += other.mu;
  b += other.b;
  d1 += other.d1;
  d2 += other.d2;
  return *this;
}

EuclideanGrad& EuclideanGrad::operator*=(double alpha) {
  mu *= alpha;
  b *= alpha;
  d1 *= alpha;
  d2 *= alpha;
  return *this;
}

bool EuclideanGrad::all_finite() const {
  return mu.allFinite() && b.allFinite() && d1.allFinite() && d2.allFinite();
}

EuclideanGrad operator+(EuclideanGrad a, const EuclideanGrad& b) {
  a += b;
  return a;
}

EuclideanGrad grad_l1(const VariationalParams& lambda, const Vector& g, const NoiseDraw& noise) {
  const Index m = lambda.dim();
  if (g.size() != m) throw DimensionError("grad_l1: model gradient has wrong length");
  if (noise.z.size() != lambda.factors() || noise.eps.size() != m) {
    throw DimensionError("grad_l1: noise shape does not match lambda");
  }
  const Matrix& b = lambda.b().matrix();
  EuclideanGrad out;
  out.mu = g;
  // diag(g eps^T) is the elementwise product.
  out.d2 = g.cwiseProduct(noise.eps);
  switch (lambda.param()) {
    case Parameterization::S:
      out.b = g * lambda.d1().cwiseProduct(noise.z).transpose();
      out.d1 = (b.transpose() * g).cwiseProduct(noise.z);
      break;
    case Parameterization::G1:
      out.b = g * noise.z.transpose();
      out.d1 = Vector(0);
      break;
    case Parameterization::G2:
      out.b = g.cwiseProduct(lambda.d1()) * noise.z.transpose();
      out.d1 = g.cwiseProduct(b * noise.z);
      break;
  }
  return out;
}

EuclideanGrad grad_l1(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise) {
  const Vector theta = sample_theta(lambda, noise);
  const LogDensity eval = model.evaluate(theta);
  if (!eval.grad.allFinite()) throw NumericalError("model gradient is not finite", theta);
  return grad_l1(lambda, eval.grad, noise);
}

EuclideanGrad grad_l2(const VariationalParams& lambda, const LowRankCovariance& cov) {
  const Index m = lambda.dim();
  const Matrix& b = lambda.b().matrix();
  // Y = Sigma^-1 A; every B and d1 term is a cheap function of it.
  const Matrix y = cov.inverse_apply(cov.loading());

  EuclideanGrad out;
  out.mu = Vector::Zero(m);
  out.d2 = cov.inverse_diag().cwiseProduct(lambda.d2());
  switch (lambda.param()) {
    case Parameterization::S:
      // Sigma^-1 B D1^2 and diag(B^T Sigma^-1 B) o d1 = diag(B^T Y).
      out.b = y * lambda.d1().asDiagonal();
      out.d1 = (b.transpose() * y).diagonal();
      break;
    case Parameterization::G1:
      out.b = y;
      out.d1 = Vector(0);
      break;
    case Parameterization::G2:
      // D1 Sigma^-1 D1 B and diag(Sigma^-1 D1 B B^T) = rowwise <Y, B>.
      out.b = lambda.d1().asDiagonal() * y;
      out.d1 = kernels::rowwise_dot(kernels::default_backend(), y, b);
      break;
  }
  return out;
}

EuclideanGrad grad_l2(const VariationalParams& lambda) { return grad_l2(lambda, LowRankCovariance(lambda)); }

EuclideanGrad grad_total(const VariationalParams& lambda, const Model& model, const NoiseDraw& noise) {
  return grad_l1(lambda, model, noise) + grad_l2(lambda);
}

}  // namespace manvb
