#include "manvb/gradients.hpp"
#include "manvb/oracle.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace manvb;
using manvb::testing::gaussian_vector;

namespace {

const Parameterization kParams[] = {Parameterization::S, Parameterization::G1, Parameterization::G2};

class LinearModel final : public Model {
 public:
  explicit LinearModel(Vector c) : c_(std::move(c)) {}
  Index dim() const override { return c_.size(); }
  LogDensity evaluate(const Vector& theta) const override { return {c_.dot(theta), c_}; }

 private:
  Vector c_;
};

class ConstantModel final : public Model {
 public:
  explicit ConstantModel(Index m) : m_(m) {}
  Index dim() const override { return m_; }
  LogDensity evaluate(const Vector&) const override { return {1.5, Vector::Zero(m_)}; }

 private:
  Index m_;
};

class NanModel final : public Model {
 public:
  Index dim() const override { return 3; }
  LogDensity evaluate(const Vector&) const override { return {0.0, Vector::Constant(3, NAN)}; }
};

double max_block_err(const EuclideanGrad& g, const oracle::GradBlocks& ref) {
  double e = oracle::relative_error(g.mu, ref.mu);
  e = std::max(e, oracle::relative_error(g.b, ref.b));
  if (ref.d1.size()) e = std::max(e, oracle::relative_error(g.d1, ref.d1));
  return std::max(e, oracle::relative_error(g.d2, ref.d2));
}

TEST(GradL1, LinearModelMeanBlockIsCoefficient) {
  Rng rng(1);
  const Vector c = gaussian_vector(6, rng);
  const LinearModel model(c);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 6, 2, rng);
    const EuclideanGrad g = grad_l1(lambda, model, NoiseDraw::sample(6, 2, rng));
    EXPECT_LT((g.mu - c).norm(), 1e-15);
  }
}

TEST(GradL1, ZeroNoiseZeroesEverythingButMu) {
  Rng rng(2);
  const LinearModel model(gaussian_vector(5, rng));
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 5, 2, rng);
    const EuclideanGrad g = grad_l1(lambda, model, NoiseDraw::zero(5, 2));
    EXPECT_EQ(g.b.norm(), 0.0);
    EXPECT_EQ(g.d1.norm(), 0.0);
    EXPECT_EQ(g.d2.norm(), 0.0);
  }
}

TEST(GradL1, ConstantModelIsZero) {
  Rng rng(3);
  const ConstantModel model(4);
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 4, 2, rng);
    const EuclideanGrad g = grad_l1(lambda, model, NoiseDraw::sample(4, 2, rng));
    EXPECT_EQ(g.mu.norm() + g.b.norm() + g.d1.norm() + g.d2.norm(), 0.0);
  }
}

TEST(GradL1, NonFiniteModelGradientThrows) {
  Rng rng(4);
  const VariationalParams lambda = oracle::random_lambda(Parameterization::S, 3, 1, rng);
  EXPECT_THROW(grad_l1(lambda, NanModel(), NoiseDraw::sample(3, 1, rng)), NumericalError);
}

TEST(GradL1, MatchesFiniteDifferences) {
  Rng rng(5);
  for (auto param : kParams) {
    for (int rep = 0; rep < 5; ++rep) {
      const Dataset data = oracle::random_logistic_data(20, 6, rng);
      const LogisticGaussianModel model(std::make_shared<const Dataset>(data), 10.0);
      const VariationalParams lambda = oracle::random_lambda(param, 6, 3, rng);
      const NoiseDraw noise = NoiseDraw::sample(6, 3, rng);
      const auto ref = oracle::fd_grad_l1(oracle::RawParams::from(lambda), model, noise);
      EXPECT_LT(max_block_err(grad_l1(lambda, model, noise), ref), oracle::kL1Tol) << to_string(param);
    }
  }
}

TEST(GradL2, MatchesFiniteDifferences) {
  Rng rng(6);
  for (auto param : kParams) {
    for (int rep = 0; rep < 5; ++rep) {
      const VariationalParams lambda = oracle::random_lambda(param, 8, 3, rng);
      const auto ref = oracle::fd_grad_l2(oracle::RawParams::from(lambda));
      const EuclideanGrad g = grad_l2(lambda);
      EXPECT_EQ(g.mu.norm(), 0.0);
      EXPECT_LT(max_block_err(g, ref), oracle::kL2Tol) << to_string(param);
    }
  }
}

TEST(GradL2, ScalarStiefel) {
  const double a = 0.8, c = 0.5;
  const VariationalParams lambda(Parameterization::S, Vector::Zero(1),
                                 ManifoldPoint(Matrix::Ones(1, 1), ManifoldKind::Stiefel), Vector::Constant(1, a),
                                 Vector::Constant(1, c));
  const EuclideanGrad g = grad_l2(lambda);
  const double s = a * a + c * c;
  EXPECT_NEAR(g.d1[0], a / s, 1e-14);
  EXPECT_NEAR(g.d2[0], c / s, 1e-14);
  EXPECT_NEAR(g.b(0, 0), a * a / s, 1e-14);
}

TEST(GradL2, G1HasNoD1Block) {
  Rng rng(7);
  const VariationalParams lambda = oracle::random_lambda(Parameterization::G1, 6, 2, rng);
  EXPECT_EQ(grad_l2(lambda).d1.size(), 0);
  EXPECT_EQ(grad_l1(lambda, LinearModel(Vector::Ones(6)), NoiseDraw::sample(6, 2, rng)).d1.size(), 0);
}

TEST(GradTotal, IsSumOfParts) {
  Rng rng(8);
  const LinearModel model(gaussian_vector(7, rng));
  for (auto param : kParams) {
    const VariationalParams lambda = oracle::random_lambda(param, 7, 3, rng);
    const NoiseDraw noise = NoiseDraw::sample(7, 3, rng);
    const EuclideanGrad sum = grad_l1(lambda, model, noise) + grad_l2(lambda);
    const EuclideanGrad total = grad_total(lambda, model, noise);
    EXPECT_LT((total.mu - sum.mu).norm() + (total.b - sum.b).norm() + (total.d1 - sum.d1).norm() +
                  (total.d2 - sum.d2).norm(),
              1e-14);
  }
}

TEST(GradTotal, MatchesFiniteDifferencesOfElbo) {
  Rng rng(9);
  for (auto param : kParams) {
    const Dataset data = oracle::random_logistic_data(20, 5, rng);
    const LogisticGaussianModel model(std::make_shared<const Dataset>(data), 10.0);
    const VariationalParams lambda = oracle::random_lambda(param, 5, 2, rng);
    const NoiseDraw noise = NoiseDraw::sample(5, 2, rng);
    const auto ref = oracle::fd_grad_total(oracle::RawParams::from(lambda), model, noise);
    EXPECT_LT(max_block_err(grad_total(lambda, model, noise), ref), oracle::kL1Tol) << to_string(param);
  }
}

TEST(GradTotal, HorseshoeMatchesFiniteDifferences) {
  Rng rng(10);
  for (auto param : kParams) {
    const Dataset data = oracle::random_logistic_data(15, 4, rng);
    const LogisticHorseshoeModel model(std::make_shared<const Dataset>(data));
    const VariationalParams lambda = oracle::random_lambda(param, 9, 3, rng);
    const NoiseDraw noise = NoiseDraw::sample(9, 3, rng);
    const auto ref = oracle::fd_grad_total(oracle::RawParams::from(lambda), model, noise);
    EXPECT_LT(max_block_err(grad_total(lambda, model, noise), ref), oracle::kL1Tol) << to_string(param);
  }
}

TEST(GradientCheck, AllRowsPass) {
  for (const auto& row : oracle::run_gradient_check(10, 42)) {
    EXPECT_TRUE(row.pass) << row.param << " " << row.block << " " << row.part << " " << row.max_rel_err;
  }
}

}  // namespace
