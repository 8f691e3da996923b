#include "manvb/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace manvb {

namespace {

constexpr double kPolarRankTol = 1e-12;

Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", got " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Stiefel:
      return "stiefel";
    case ManifoldKind::Grassmann:
      return "grassmann";
    case ManifoldKind::Euclidean:
      return "euclidean";
  }
  return "unknown";
}

double orth_residual(const Matrix& b) {
  return (b.transpose() * b - Matrix::Identity(b.cols(), b.cols())).norm();
}

double sigma_min(const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(b);
  return svd.singularValues().minCoeff();
}

ManifoldPoint::ManifoldPoint(Matrix b, ManifoldKind kind, double tol) : b_(std::move(b)), kind_(kind) {
  if (b_.cols() < 1 || b_.cols() > b_.rows()) {
    throw DimensionError("manifold point needs 1 <= p <= m, got " + std::to_string(b_.rows()) + "x" +
                         std::to_string(b_.cols()));
  }
  if (!b_.allFinite()) throw NumericalError("manifold point has non-finite entries");
  if (kind_ != ManifoldKind::Euclidean) {
    const double r = orth_residual(b_);
    if (!(r <= tol)) {
      throw GeometryError("columns are not orthonormal: ||B^T B - I||_F = " + std::to_string(r));
    }
  }
}

bool ManifoldPoint::same_as(const ManifoldPoint& other) const {
  return kind_ == other.kind_ && b_.rows() == other.b_.rows() && b_.cols() == other.b_.cols() &&
         b_ == other.b_;
}

double tangent_residual(const ManifoldPoint& b, const Matrix& u) {
  require_same_shape(b.matrix(), u, "tangent residual");
  switch (b.kind()) {
    case ManifoldKind::Stiefel:
      return sym(b.matrix().transpose() * u).norm();
    case ManifoldKind::Grassmann:
      return (b.matrix().transpose() * u).norm();
    case ManifoldKind::Euclidean:
      return 0.0;
  }
  return 0.0;
}

TangentVector::TangentVector(ManifoldPoint base, Matrix u) : base_(std::move(base)), u_(std::move(u)) {
  const double r = tangent_residual(base_, u_);
  if (!(r <= kTangentTol * std::max(1.0, u_.norm()))) {
    throw GeometryError("matrix is not tangent at the base point (residual " + std::to_string(r) + ")");
  }
}

TangentVector::TangentVector(ManifoldPoint base, Matrix u, Unchecked)
    : base_(std::move(base)), u_(std::move(u)) {}

TangentVector TangentVector::zero(const ManifoldPoint& base) {
  return TangentVector(base, Matrix::Zero(base.rows(), base.cols()), Unchecked{});
}

TangentVector project(const ManifoldPoint& b, const Matrix& z) {
  require_same_shape(b.matrix(), z, "project");
  const Matrix& bm = b.matrix();
  switch (b.kind()) {
    case ManifoldKind::Stiefel:
      return TangentVector(b, z - bm * sym(bm.transpose() * z), TangentVector::Unchecked{});
    case ManifoldKind::Grassmann:
      // (I - B B^T) Z without forming the m x m projector.
      return TangentVector(b, z - bm * (bm.transpose() * z), TangentVector::Unchecked{});
    case ManifoldKind::Euclidean:
      break;
  }
  return TangentVector(b, z, TangentVector::Unchecked{});
}

ManifoldPoint retract(const ManifoldPoint& b, const TangentVector& u) {
  if (!u.base().same_as(b)) throw GeometryError("retract: tangent vector is based at a different point");
  const Matrix& bm = b.matrix();
  const Matrix& um = u.matrix();
  switch (b.kind()) {
    case ManifoldKind::Stiefel:
    case ManifoldKind::Grassmann: {
      // Polar factor of B + U. For U tangent on the Stiefel manifold this is
      // (B + U)(I + U^T U)^{-1/2}; the SVD form stays orthonormal when U
      // carries rounding off the tangent space.
      if (!um.allFinite()) throw NumericalError("retract: non-finite tangent vector");
      const Matrix x = bm + um;
      Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (!(svd.singularValues().minCoeff() >= kPolarRankTol)) {
        throw DegenerateRetractionError("retract: B + U is rank deficient, polar factor undefined");
      }
      return ManifoldPoint(svd.matrixU() * svd.matrixV().transpose(), b.kind(), kDriftTol);
    }
    case ManifoldKind::Euclidean:
      break;
  }
  return ManifoldPoint(bm + um, ManifoldKind::Euclidean);
}

TangentVector transport(const ManifoldPoint& from, const ManifoldPoint& to, const TangentVector& u) {
  if (from.kind() != to.kind()) throw GeometryError("transport: points live on different manifolds");
  require_same_shape(from.matrix(), to.matrix(), "transport");
  if (!u.base().same_as(from)) throw GeometryError("transport: tangent vector is not based at the source");
  return project(to, u.matrix());
}

TangentVector scaled(const TangentVector& u, double alpha) {
  return TangentVector(u.base_, alpha * u.u_, TangentVector::Unchecked{});
}

TangentVector combine(double a, const TangentVector& u, double b, const TangentVector& v) {
  if (!u.base_.same_as(v.base_)) throw GeometryError("combine: tangent vectors at different points");
  return TangentVector(u.base_, a * u.u_ + b * v.u_, TangentVector::Unchecked{});
}

Matrix orthonormalize(const Matrix& a) {
  if (a.cols() < 1 || a.cols() > a.rows()) throw DimensionError("orthonormalize: need 1 <= p <= m");
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < a.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

ManifoldPoint random_point(Index m, Index p, ManifoldKind kind, Rng& rng) {
  if (p < 1 || p > m) {
    throw DimensionError("random_point: need 1 <= p <= m, got m=" + std::to_string(m) + ", p=" +
                         std::to_string(p));
  }
  std::normal_distribution<double> normal;
  Matrix draw(m, p);
  // Fill column by column so the draw order is independent of storage order.
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < m; ++i) draw(i, j) = normal(rng);
  return ManifoldPoint(orthonormalize(draw), kind);
}

}  // namespace manvb
