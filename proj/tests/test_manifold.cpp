#include "test_util.hpp"

#include <cmath>

using namespace manvb;
using manvb::testing::gaussian_matrix;
using manvb::testing::sym;

namespace {

const ManifoldKind kKinds[] = {ManifoldKind::Stiefel, ManifoldKind::Grassmann};

TEST(ManifoldPoint, RejectsBadShapesAndNonOrthonormalInput) {
  EXPECT_THROW(ManifoldPoint(Matrix::Identity(2, 3), ManifoldKind::Stiefel), DimensionError);
  EXPECT_THROW(ManifoldPoint(Matrix(3, 0), ManifoldKind::Stiefel), DimensionError);
  Matrix b = Matrix::Identity(3, 2);
  b(0, 0) = 1.0 + 1e-6;
  EXPECT_THROW(ManifoldPoint(b, ManifoldKind::Grassmann), GeometryError);
  Matrix nan = Matrix::Identity(3, 2);
  nan(2, 1) = NAN;
  EXPECT_THROW(ManifoldPoint(nan, ManifoldKind::Stiefel), Error);
  EXPECT_NO_THROW(ManifoldPoint(b, ManifoldKind::Euclidean));
}

TEST(ManifoldPoint, AcceptsResidualWithinTolerance) {
  Matrix b = Matrix::Identity(4, 2);
  b(0, 0) += 1e-12;
  EXPECT_NO_THROW(ManifoldPoint(b, ManifoldKind::Stiefel));
}

TEST(Project, OfBaseIsZero) {
  Rng rng(3);
  for (auto kind : kKinds) {
    const ManifoldPoint b = random_point(6, 3, kind, rng);
    EXPECT_LT(project(b, b.matrix()).matrix().norm(), 1e-14) << to_string(kind);
  }
}

TEST(Project, ResidualIsSkewOrZero) {
  Rng rng(5);
  const ManifoldPoint s = random_point(5, 2, ManifoldKind::Stiefel, rng);
  const ManifoldPoint g = random_point(5, 2, ManifoldKind::Grassmann, rng);
  const Matrix z = gaussian_matrix(5, 2, rng);
  EXPECT_LT(sym(s.matrix().transpose() * project(s, z).matrix()).norm(), 1e-12);
  EXPECT_LT((g.matrix().transpose() * project(g, z).matrix()).norm(), 1e-12);
}

TEST(Project, ShapeMismatchThrows) {
  Rng rng(1);
  const ManifoldPoint b = random_point(5, 2, ManifoldKind::Stiefel, rng);
  EXPECT_THROW(project(b, Matrix::Zero(5, 3)), DimensionError);
}

TEST(Project, IdempotentOverRandomCases) {
  Rng rng(11);
  for (auto kind : kKinds) {
    for (Index m : {3, 10, 50}) {
      for (Index p : {1, 2, 5}) {
        if (p > m) continue;
        for (int rep = 0; rep < 100; ++rep) {
          const ManifoldPoint b = random_point(m, p, kind, rng);
          const Matrix z = gaussian_matrix(m, p, rng);
          const TangentVector once = project(b, z);
          const TangentVector twice = project(b, once.matrix());
          ASSERT_LT((once.matrix() - twice.matrix()).norm(), 1e-12 * std::max(1.0, z.norm()));
          if (kind == ManifoldKind::Grassmann) {
            ASSERT_LT((b.matrix().transpose() * once.matrix()).norm(), 1e-12 * std::max(1.0, z.norm()));
          }
        }
      }
    }
  }
}

TEST(TangentVector, RejectsNonTangentInput) {
  Rng rng(2);
  const ManifoldPoint b = random_point(4, 2, ManifoldKind::Grassmann, rng);
  EXPECT_THROW(TangentVector(b, b.matrix()), GeometryError);
  EXPECT_THROW(TangentVector(b, Matrix::Zero(4, 3)), DimensionError);
  EXPECT_NO_THROW(TangentVector(b, project(b, gaussian_matrix(4, 2, rng)).matrix()));
}

TEST(Retract, ZeroIsIdentity) {
  Rng rng(4);
  for (auto kind : kKinds) {
    const ManifoldPoint b = random_point(7, 3, kind, rng);
    const ManifoldPoint r = retract(b, TangentVector::zero(b));
    EXPECT_LT((r.matrix() - b.matrix()).norm(), 1e-14);
  }
}

TEST(Retract, StiefelScalarCase) {
  Matrix b(2, 1);
  b << 1.0, 0.0;
  Matrix u(2, 1);
  u << 0.0, 1.0;
  const ManifoldPoint p(b, ManifoldKind::Stiefel);
  const ManifoldPoint r = retract(p, TangentVector(p, u));
  EXPECT_NEAR(r.matrix()(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.matrix()(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Retract, StiefelMatchesInverseSquareRootForm) {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const ManifoldPoint b = random_point(9, 4, ManifoldKind::Stiefel, rng);
    const TangentVector u = project(b, gaussian_matrix(9, 4, rng, 0.7));
    const Matrix& um = u.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix::Identity(4, 4) + um.transpose() * um);
    const Matrix inv_sqrt = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose();
    const Matrix closed_form = (b.matrix() + um) * inv_sqrt;
    EXPECT_LT((retract(b, u).matrix() - closed_form).norm(), 1e-12);
  }
}

TEST(Retract, OutputOrthonormal) {
  Rng rng(9);
  for (auto kind : kKinds) {
    for (int rep = 0; rep < 50; ++rep) {
      const ManifoldPoint b = random_point(12, 4, kind, rng);
      const TangentVector u = project(b, gaussian_matrix(12, 4, rng, 3.0));
      EXPECT_LE(orth_residual(retract(b, u).matrix()), 1e-10);
    }
  }
}

TEST(Retract, RejectsTangentFromAnotherPoint) {
  Rng rng(10);
  const ManifoldPoint a = random_point(5, 2, ManifoldKind::Stiefel, rng);
  const ManifoldPoint b = random_point(5, 2, ManifoldKind::Stiefel, rng);
  EXPECT_THROW(retract(b, TangentVector::zero(a)), GeometryError);
}

TEST(Retract, LargeTangentStaysOrthonormal) {
  // sigma_min(B + U) >= 1 for every tangent U, so the rank guard cannot
  // fire on valid input; a huge step must still land on the manifold.
  Rng rng(10);
  for (auto kind : kKinds) {
    const ManifoldPoint b = random_point(6, 2, kind, rng);
    const TangentVector u = project(b, gaussian_matrix(6, 2, rng, 1e10));
    EXPECT_LE(orth_residual(retract(b, u).matrix()), 1e-10) << to_string(kind);
  }
}

TEST(Retract, FirstOrderAgreementWithAddition) {
  Rng rng(12);
  for (auto kind : kKinds) {
    const ManifoldPoint b = random_point(8, 3, kind, rng);
    const TangentVector u = project(b, gaussian_matrix(8, 3, rng));
    auto gap = [&](double t) { return (retract(b, scaled(u, t)).matrix() - (b.matrix() + t * u.matrix())).norm(); };
    const double ratio = gap(1e-3) / gap(1e-4);
    EXPECT_GT(ratio, 70.0) << to_string(kind);
    EXPECT_LT(ratio, 130.0) << to_string(kind);
  }
}

TEST(Transport, SamePointIsIdentityAndZeroStaysZero) {
  Rng rng(13);
  for (auto kind : kKinds) {
    const ManifoldPoint b1 = random_point(6, 2, kind, rng);
    const ManifoldPoint b2 = random_point(6, 2, kind, rng);
    const TangentVector u = project(b1, gaussian_matrix(6, 2, rng));
    EXPECT_LT((transport(b1, b1, u).matrix() - u.matrix()).norm(), 1e-12);
    EXPECT_EQ(transport(b1, b2, TangentVector::zero(b1)).matrix().norm(), 0.0);
  }
}

TEST(Transport, OutputTangentAtDestination) {
  Rng rng(14);
  for (auto kind : kKinds) {
    const ManifoldPoint b1 = random_point(6, 2, kind, rng);
    const ManifoldPoint b2 = random_point(6, 2, kind, rng);
    const TangentVector u = project(b1, gaussian_matrix(6, 2, rng));
    EXPECT_LT(tangent_residual(b2, transport(b1, b2, u).matrix()), 1e-12);
  }
}

TEST(Transport, KindMismatchThrows) {
  Rng rng(15);
  const ManifoldPoint s = random_point(6, 2, ManifoldKind::Stiefel, rng);
  const ManifoldPoint g = random_point(6, 2, ManifoldKind::Grassmann, rng);
  EXPECT_THROW(transport(s, g, TangentVector::zero(s)), GeometryError);
}

TEST(RandomPoint, SquareIsOrthogonal) {
  Rng rng(16);
  const ManifoldPoint q = random_point(3, 3, ManifoldKind::Stiefel, rng);
  EXPECT_NEAR(std::abs(q.matrix().determinant()), 1.0, 1e-12);
}

TEST(RandomPoint, OrthonormalColumns) {
  Rng rng(17);
  const ManifoldPoint b = random_point(5, 2, ManifoldKind::Grassmann, rng);
  EXPECT_LT(orth_residual(b.matrix()), 1e-12);
}

TEST(RandomPoint, DeterministicGivenSeed) {
  Rng a(99), b(99);
  const ManifoldPoint pa = random_point(10, 4, ManifoldKind::Stiefel, a);
  const ManifoldPoint pb = random_point(10, 4, ManifoldKind::Stiefel, b);
  EXPECT_TRUE(pa.same_as(pb));
}

TEST(RandomPoint, PGreaterThanMThrows) {
  Rng rng(1);
  EXPECT_THROW(random_point(2, 3, ManifoldKind::Stiefel, rng), DimensionError);
}

TEST(Orthonormalize, PositiveDiagonalConvention) {
  Rng rng(18);
  const Matrix a = gaussian_matrix(6, 3, rng);
  const Matrix q = orthonormalize(a);
  const Matrix r = q.transpose() * a;
  for (Index j = 0; j < 3; ++j) EXPECT_GT(r(j, j), 0.0);
  EXPECT_LT((q * r - a).norm(), 1e-12);
}

TEST(Chain, NoDriftOverThousandSteps) {
  Rng rng(19);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto kind : kKinds) {
    ManifoldPoint b = random_point(20, 4, kind, rng);
    TangentVector carried = TangentVector::zero(b);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const TangentVector fresh = project(b, gaussian_matrix(20, 4, rng, 0.5));
      const TangentVector step = combine(0.5, carried, 1.0, fresh);
      const ManifoldPoint next = retract(b, step);
      carried = transport(b, next, step);
      b = next;
      worst = std::max(worst, orth_residual(b.matrix()));
    }
    EXPECT_LE(worst, 1e-8) << to_string(kind);
    EXPECT_GE(sigma_min(b.matrix()), 1.0 - 1e-8);
  }
}

TEST(Euclidean, IdentityGeometry) {
  Rng rng(20);
  const Matrix bm = gaussian_matrix(4, 2, rng);
  const ManifoldPoint b(bm, ManifoldKind::Euclidean);
  const Matrix z = gaussian_matrix(4, 2, rng);
  const TangentVector u = project(b, z);
  EXPECT_EQ(u.matrix(), z);
  EXPECT_EQ(retract(b, u).matrix(), bm + z);
}

}  // namespace
