#include "manvb/factor_gaussian.hpp"
#include "manvb/oracle.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace manvb;
using manvb::testing::gaussian_matrix;
using manvb::testing::gaussian_vector;

namespace {

const Parameterization kParams[] = {Parameterization::S, Parameterization::G1, Parameterization::G2};

VariationalParams scalar_lambda(double a, double b) {
  return VariationalParams(Parameterization::S, Vector::Zero(1),
                           ManifoldPoint(Matrix::Ones(1, 1), ManifoldKind::Stiefel), Vector::Constant(1, a),
                           Vector::Constant(1, b));
}

TEST(VariationalParams, Validation) {
  Rng rng(1);
  const ManifoldPoint s = random_point(5, 2, ManifoldKind::Stiefel, rng);
  const ManifoldPoint g = random_point(5, 2, ManifoldKind::Grassmann, rng);
  const Vector mu = Vector::Zero(5);
  EXPECT_NO_THROW(VariationalParams(Parameterization::S, mu, s, Vector::Ones(2), Vector::Ones(5)));
  EXPECT_NO_THROW(VariationalParams(Parameterization::G1, mu, g, Vector(), Vector::Ones(5)));
  EXPECT_NO_THROW(VariationalParams(Parameterization::G2, mu, g, Vector::Ones(5), Vector::Ones(5)));
  EXPECT_THROW(VariationalParams(Parameterization::S, mu, g, Vector::Ones(2), Vector::Ones(5)), GeometryError);
  EXPECT_THROW(VariationalParams(Parameterization::G1, mu, s, Vector(), Vector::Ones(5)), GeometryError);
  EXPECT_THROW(VariationalParams(Parameterization::S, mu, s, Vector::Ones(5), Vector::Ones(5)), DimensionError);
  EXPECT_THROW(VariationalParams(Parameterization::G1, mu, g, Vector::Ones(2), Vector::Ones(5)), DimensionError);
  EXPECT_THROW(VariationalParams(Parameterization::S, Vector::Zero(4), s, Vector::Ones(2), Vector::Ones(5)),
               DimensionError);
  Vector tiny = Vector::Ones(5);
  tiny[3] = 1e-9;
  EXPECT_THROW(VariationalParams(Parameterization::S, mu, s, Vector::Ones(2), tiny), DomainError);
  tiny[3] = -1e-8;
  EXPECT_NO_THROW(VariationalParams(Parameterization::S, mu, s, Vector::Ones(2), tiny));
}

TEST(ClampToFloor, PushesSmallEntriesOut) {
  Vector v(4);
  v << 0.0, -1e-12, 2e-9, 0.5;
  const Vector c = clamp_to_floor(v);
  EXPECT_EQ(c[0], kD2Floor);
  EXPECT_EQ(c[1], -kD2Floor);
  EXPECT_EQ(c[2], kD2Floor);
  EXPECT_EQ(c[3], 0.5);
}

TEST(ParseParameterization, RoundTrip) {
  for (auto p : kParams) EXPECT_EQ(parse_parameterization(to_string(p)), p);
  EXPECT_EQ(parse_parameterization("g2"), Parameterization::G2);
  EXPECT_FALSE(parse_parameterization("G3"));
}

TEST(SampleTheta, ZeroNoiseGivesMean) {
  Rng rng(2);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 6, 2, rng);
    EXPECT_EQ(sample_theta(lambda, NoiseDraw::zero(6, 2)), lambda.mu());
  }
}

TEST(SampleTheta, SelectorColumns) {
  const Vector mu = Vector::LinSpaced(4, 1.0, 4.0);
  const VariationalParams lambda(Parameterization::G1, mu, ManifoldPoint(Matrix::Identity(4, 2), ManifoldKind::Grassmann),
                                 Vector(), Vector::Constant(4, kD2Floor));
  NoiseDraw noise = NoiseDraw::zero(4, 2);
  noise.z[0] = 1.0;
  noise.eps.setOnes();
  Vector expected = mu;
  expected[0] += 1.0;
  EXPECT_LT((sample_theta(lambda, noise) - expected).cwiseAbs().maxCoeff(), 2e-8);
}

TEST(SampleTheta, MatchesDenseLoops) {
  Rng rng(3);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 9, 3, rng);
    const NoiseDraw noise = NoiseDraw::sample(9, 3, rng);
    EXPECT_LT((sample_theta(lambda, noise) - oracle::dense_theta(oracle::RawParams::from(lambda), noise)).norm(),
              1e-13);
  }
}

TEST(SampleTheta, ShapeMismatchThrows) {
  Rng rng(4);
  const VariationalParams lambda = oracle::random_lambda(Parameterization::S, 5, 2, rng);
  EXPECT_THROW(sample_theta(lambda, NoiseDraw::zero(5, 3)), DimensionError);
}

TEST(SampleTheta, EmpiricalCovarianceMatchesSigma) {
  Rng rng(5);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 4, 2, rng);
    const int n = 100000;
    Matrix draws(4, n);
    for (int k = 0; k < n; ++k) draws.col(k) = sample_theta(lambda, NoiseDraw::sample(4, 2, rng));
    const Vector mean = draws.rowwise().mean();
    const Matrix centered = draws.colwise() - mean;
    const Matrix emp = centered * centered.transpose() / (n - 1.0);
    const Matrix sigma = cov_matrix(lambda);
    const double bound = 5.0 * std::sqrt(sigma.diagonal().maxCoeff() * sigma.diagonal().maxCoeff() / n);
    EXPECT_LT((emp - sigma).cwiseAbs().maxCoeff(), bound) << to_string(param);
  }
}

TEST(CovMatrix, StiefelSpectrum) {
  Rng rng(6);
  const ManifoldPoint b = random_point(7, 3, ManifoldKind::Stiefel, rng);
  const double a = 1.3, c = 0.4;
  const VariationalParams lambda(Parameterization::S, Vector::Zero(7), b, Vector::Constant(3, a),
                                 Vector::Constant(7, c));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_matrix(lambda));
  const Vector ev = eig.eigenvalues();  // ascending
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], c * c, 1e-12);
  for (Index i = 4; i < 7; ++i) EXPECT_NEAR(ev[i], a * a + c * c, 1e-12);
}

TEST(CovMatrix, G1SelectorDiagonal) {
  const VariationalParams lambda(Parameterization::G1, Vector::Zero(5),
                                 ManifoldPoint(Matrix::Identity(5, 2), ManifoldKind::Grassmann), Vector(),
                                 Vector::Ones(5));
  Vector diag(5);
  diag << 2, 2, 1, 1, 1;
  EXPECT_TRUE(cov_matrix(lambda).isApprox(Matrix(diag.asDiagonal()), 0.0));
}

TEST(CovMatrix, MatchesNaiveLoops) {
  Rng rng(7);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 8, 3, rng);
    EXPECT_LT((cov_matrix(lambda) - oracle::dense_sigma(oracle::RawParams::from(lambda))).cwiseAbs().maxCoeff(),
              1e-13);
  }
}

TEST(CovMatrix, EigenvaluesAboveD2Floor) {
  Rng rng(8);
  for (auto param : kParams) {
    for (int rep = 0; rep < 20; ++rep) {
      const VariationalParams lambda = oracle::random_lambda(param, 10, 3, rng);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_matrix(lambda));
      EXPECT_GE(eig.eigenvalues().minCoeff(), lambda.d2().cwiseAbs2().minCoeff() - 1e-12);
    }
  }
}

TEST(LogDet, UnitS) {
  Rng rng(9);
  const ManifoldPoint b = random_point(6, 2, ManifoldKind::Stiefel, rng);
  const VariationalParams lambda(Parameterization::S, Vector::Zero(6), b, Vector::Ones(2), Vector::Ones(6));
  EXPECT_NEAR(log_det_sigma(lambda), 2.0 * std::log(2.0), 1e-13);
}

TEST(LogDet, Scalar) {
  EXPECT_NEAR(log_det_sigma(scalar_lambda(0.7, 0.3)), std::log(0.49 + 0.09), 1e-15);
}

TEST(LogDet, G1UniformD2MatchesDense) {
  Rng rng(10);
  const ManifoldPoint b = random_point(10, 3, ManifoldKind::Grassmann, rng);
  const double c = 0.6;
  const VariationalParams lambda(Parameterization::G1, Vector::Zero(10), b, Vector(), Vector::Constant(10, c));
  const double closed = 3.0 * std::log(1.0 + c * c) + 7.0 * std::log(c * c);
  EXPECT_NEAR(log_det_sigma(lambda), closed, 1e-10);
  EXPECT_NEAR(log_det_sigma(lambda), oracle::dense_log_det(cov_matrix(lambda)), 1e-10);
}

TEST(LogDet, RandomAgainstDenseOracle) {
  Rng rng(11);
  std::uniform_int_distribution<int> mdist(1, 30);
  for (int rep = 0; rep < 200; ++rep) {
    const auto param = kParams[rep % 3];
    const Index m = mdist(rng);
    const Index p = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<Index>(m, 5)))(rng);
    const VariationalParams lambda = oracle::random_lambda(param, m, p, rng);
    const double dense = oracle::dense_log_det(oracle::dense_sigma(oracle::RawParams::from(lambda)));
    ASSERT_LE(std::abs(log_det_sigma(lambda) - dense), 1e-10 * std::max(1.0, std::abs(dense)));
  }
}

TEST(InverseApply, RoundTrip) {
  Rng rng(12);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 10, 3, rng);
    const Matrix w = gaussian_matrix(10, 4, rng);
    const Matrix v = cov_matrix(lambda) * w;
    EXPECT_LT((sigma_inverse_apply(lambda, v) - w).norm(), 1e-9 * w.norm()) << to_string(param);
  }
}

TEST(InverseApply, ZeroD1IsDiagonalSolve) {
  Rng rng(13);
  const ManifoldPoint b = random_point(6, 2, ManifoldKind::Stiefel, rng);
  const Vector d2 = gaussian_vector(6, rng).cwiseAbs().array() + 0.5;
  const VariationalParams lambda(Parameterization::S, Vector::Zero(6), b, Vector::Zero(2), d2);
  const Matrix v = gaussian_matrix(6, 3, rng);
  const Matrix expected = d2.cwiseAbs2().cwiseInverse().asDiagonal() * v;
  EXPECT_TRUE(sigma_inverse_apply(lambda, v) == expected);
}

TEST(InverseApply, Scalar) {
  const Matrix v = Matrix::Constant(1, 1, 2.5);
  EXPECT_NEAR(sigma_inverse_apply(scalar_lambda(0.7, 0.3), v)(0, 0), 2.5 / 0.58, 1e-15);
}

TEST(InverseApply, RandomAgainstDenseSolve) {
  Rng rng(14);
  std::uniform_int_distribution<int> mdist(1, 30);
  for (int rep = 0; rep < 200; ++rep) {
    const auto param = kParams[rep % 3];
    const Index m = mdist(rng);
    const Index p = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<Index>(m, 5)))(rng);
    const VariationalParams lambda = oracle::random_lambda(param, m, p, rng);
    const Matrix v = gaussian_matrix(m, 2, rng);
    const Matrix dense = oracle::dense_sigma(oracle::RawParams::from(lambda)).partialPivLu().solve(v);
    ASSERT_LE(oracle::relative_error(sigma_inverse_apply(lambda, v), dense), 1e-9);
  }
}

TEST(InverseDiag, MatchesDenseInverse) {
  Rng rng(15);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 12, 4, rng);
    const LowRankCovariance cov(lambda);
    const Vector dense = cov_matrix(lambda).inverse().diagonal();
    EXPECT_LT(oracle::relative_error(cov.inverse_diag(), dense), 1e-11);
  }
}

TEST(Identification, G1RotationInvariance) {
  Rng rng(16);
  const VariationalParams lambda = oracle::random_lambda(Parameterization::G1, 8, 3, rng);
  const Matrix q = random_point(3, 3, ManifoldKind::Stiefel, rng).matrix();
  const VariationalParams rotated(Parameterization::G1, lambda.mu(),
                                  ManifoldPoint(lambda.b().matrix() * q, ManifoldKind::Grassmann), Vector(),
                                  lambda.d2());
  EXPECT_NEAR(log_det_sigma(rotated), log_det_sigma(lambda), 1e-12);
  const NoiseDraw noise = NoiseDraw::sample(8, 3, rng);
  NoiseDraw turned = noise;
  turned.z = q.transpose() * noise.z;
  EXPECT_LT((sample_theta(rotated, turned) - sample_theta(lambda, noise)).norm(), 1e-12);
}

class ConstantModel final : public Model {
 public:
  explicit ConstantModel(Index m) : m_(m) {}
  Index dim() const override { return m_; }
  LogDensity evaluate(const Vector& theta) const override { return {-0.5 * theta.squaredNorm(), -theta}; }

 private:
  Index m_;
};

TEST(ElboEstimate, ZeroNoise) {
  Rng rng(17);
  const VariationalParams lambda = oracle::random_lambda(Parameterization::G2, 5, 2, rng);
  const ConstantModel model(5);
  EXPECT_NEAR(elbo_estimate(lambda, model, NoiseDraw::zero(5, 2)),
              model.log_h(lambda.mu()) + 0.5 * log_det_sigma(lambda), 1e-13);
}

TEST(ElboEstimate, MonteCarloAgreesWithClosedForm) {
  // Target N(mu0, Sigma0): E_q[log h] + 1/2 log|Sigma| has a closed form.
  Rng rng(18);
  const Index m = 5;
  const Vector mu0 = gaussian_vector(m, rng);
  const Matrix l = gaussian_matrix(m, m, rng);
  const Matrix sigma0 = l * l.transpose() + Matrix::Identity(m, m);
  const GaussianTargetModel model(mu0, sigma0);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, m, 2, rng);
    const Matrix sigma = cov_matrix(lambda);
    const Eigen::LLT<Matrix> chol(sigma0);
    const Vector diff = lambda.mu() - mu0;
    const double closed = -0.5 * (chol.solve(sigma).trace() + diff.dot(chol.solve(diff))) +
                          0.5 * std::log(sigma.determinant());
    const int n = 10000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double e = elbo_estimate(lambda, model, NoiseDraw::sample(m, 2, rng));
      sum += e;
      sum_sq += e * e;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - closed), 3.0 * se + 1e-12) << to_string(param);
  }
}

TEST(LowRankCovariance, IllConditionedThrows) {
  Matrix a = Matrix::Constant(3, 1, 1e200);
  EXPECT_THROW(LowRankCovariance(a, Vector::Constant(3, 1e-8)), IllConditionedCovarianceError);
}

}  // namespace
