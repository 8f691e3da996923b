#include "manvb/oracle.hpp"

#include "manvb/gradients.hpp"

#include <algorithm>
#include <cmath>

namespace manvb::oracle {

namespace {

Vector pack(const RawParams& raw) {
  const Index m = raw.mu.size();
  const Index nb = raw.b.size();
  Vector x(m + nb + raw.d1.size() + raw.d2.size());
  x << raw.mu, Eigen::Map<const Vector>(raw.b.data(), nb), raw.d1, raw.d2;
  return x;
}

RawParams unpack(const RawParams& shape, const Vector& x) {
  RawParams out = shape;
  const Index m = shape.mu.size();
  const Index nb = shape.b.size();
  const Index nd1 = shape.d1.size();
  out.mu = x.head(m);
  out.b = Eigen::Map<const Matrix>(x.data() + m, shape.b.rows(), shape.b.cols());
  out.d1 = x.segment(m + nb, nd1);
  out.d2 = x.segment(m + nb + nd1, shape.d2.size());
  return out;
}

GradBlocks split(const RawParams& shape, const Vector& g) {
  const RawParams r = unpack(shape, g);
  return {r.mu, r.b, r.d1, r.d2};
}

GradBlocks to_blocks(const EuclideanGrad& g) { return {g.mu, g.b, g.d1, g.d2}; }

}  // namespace

RawParams RawParams::from(const VariationalParams& lambda) {
  return {lambda.param(), lambda.mu(), lambda.b().matrix(), lambda.d1(), lambda.d2()};
}

Matrix dense_sigma(const RawParams& raw) {
  const Index m = raw.mu.size();
  const Index p = raw.b.cols();
  Matrix sigma = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (Index k = 0; k < p; ++k) {
        switch (raw.param) {
          case Parameterization::S:  // (B D1^2 B^T)_ij
            s += raw.b(i, k) * raw.d1[k] * raw.d1[k] * raw.b(j, k);
            break;
          case Parameterization::G1:  // (B B^T)_ij
            s += raw.b(i, k) * raw.b(j, k);
            break;
          case Parameterization::G2:  // (D1 B B^T D1)_ij
            s += raw.d1[i] * raw.b(i, k) * raw.b(j, k) * raw.d1[j];
            break;
        }
      }
      sigma(i, j) = s;
    }
    sigma(i, i) += raw.d2[i] * raw.d2[i];
  }
  return sigma;
}

double dense_log_det(const Matrix& m) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix& packed = lu.matrixLU();
  double s = 0.0;
  for (Index i = 0; i < packed.rows(); ++i) s += std::log(std::abs(packed(i, i)));
  return s;
}

Vector dense_theta(const RawParams& raw, const NoiseDraw& noise) {
  const Index m = raw.mu.size();
  const Index p = raw.b.cols();
  Vector theta(m);
  for (Index i = 0; i < m; ++i) {
    double s = raw.mu[i] + raw.d2[i] * noise.eps[i];
    for (Index k = 0; k < p; ++k) {
      switch (raw.param) {
        case Parameterization::S:
          s += raw.b(i, k) * raw.d1[k] * noise.z[k];
          break;
        case Parameterization::G1:
          s += raw.b(i, k) * noise.z[k];
          break;
        case Parameterization::G2:
          s += raw.d1[i] * raw.b(i, k) * noise.z[k];
          break;
      }
    }
    theta[i] = s;
  }
  return theta;
}

double dense_elbo(const RawParams& raw, const Model& model, const NoiseDraw& noise) {
  return model.log_h(dense_theta(raw, noise)) + 0.5 * dense_log_det(dense_sigma(raw));
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

GradBlocks fd_grad_l1(const RawParams& raw, const Model& model, const NoiseDraw& noise, double h) {
  auto f = [&](const Vector& x) { return model.log_h(dense_theta(unpack(raw, x), noise)); };
  return split(raw, fd_gradient(f, pack(raw), h));
}

GradBlocks fd_grad_l2(const RawParams& raw, double h) {
  auto f = [&](const Vector& x) { return 0.5 * dense_log_det(dense_sigma(unpack(raw, x))); };
  return split(raw, fd_gradient(f, pack(raw), h));
}

GradBlocks fd_grad_total(const RawParams& raw, const Model& model, const NoiseDraw& noise, double h) {
  auto f = [&](const Vector& x) { return dense_elbo(unpack(raw, x), model, noise); };
  return split(raw, fd_gradient(f, pack(raw), h));
}

double relative_error(const Matrix& a, const Matrix& ref) {
  if (a.rows() != ref.rows() || a.cols() != ref.cols()) return INFINITY;
  if (ref.size() == 0) return 0.0;
  return (a - ref).norm() / std::max(ref.norm(), 1e-8);
}

VariationalParams random_lambda(Parameterization param, Index m, Index p, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ManifoldPoint b = random_point(m, p, manifold_for(param), rng);
  Vector mu(m);
  for (Index i = 0; i < m; ++i) mu[i] = 0.5 * normal(rng);
  Vector d1(d1_length(param, m, p));
  for (Index i = 0; i < d1.size(); ++i) d1[i] = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));
  Vector d2(m);
  for (Index i = 0; i < m; ++i) d2[i] = 0.3 + 0.7 * unit(rng);
  return VariationalParams(param, std::move(mu), std::move(b), std::move(d1), std::move(d2));
}

Dataset random_logistic_data(Index n, Index m, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data;
  data.x.resize(n, m);
  data.y.resize(n);
  Vector beta(m);
  for (Index j = 0; j < m; ++j) beta[j] = normal(rng);
  for (Index i = 0; i < n; ++i) {
    data.x(i, 0) = 1.0;
    for (Index j = 1; j < m; ++j) data.x(i, j) = normal(rng);
    const double eta = data.x.row(i).dot(beta);
    data.y[i] = unit(rng) < kernels::logistic(eta) ? 1.0 : 0.0;
  }
  return data;
}

std::vector<CheckRow> run_gradient_check(int instances, std::uint64_t seed) {
  const Parameterization params[] = {Parameterization::S, Parameterization::G1, Parameterization::G2};
  const char* blocks[] = {"mu", "B", "d1", "d2"};
  std::vector<CheckRow> rows;
  Rng rng(seed);
  std::uniform_int_distribution<int> dim_dist(3, 10);

  for (Parameterization param : params) {
    double worst[2][4] = {};
    for (int inst = 0; inst < instances; ++inst) {
      const Index m = dim_dist(rng);
      const Index p = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<Index>(m, 4)))(rng);
      auto data = std::make_shared<const Dataset>(random_logistic_data(20, m, rng));
      const LogisticGaussianModel model(data, 10.0);
      const VariationalParams lambda = random_lambda(param, m, p, rng);
      const NoiseDraw noise = NoiseDraw::sample(m, p, rng);
      const RawParams raw = RawParams::from(lambda);

      const GradBlocks analytic[2] = {to_blocks(grad_l1(lambda, model, noise)), to_blocks(grad_l2(lambda))};
      const GradBlocks reference[2] = {fd_grad_l1(raw, model, noise), fd_grad_l2(raw)};
      for (int part = 0; part < 2; ++part) {
        const double errs[4] = {relative_error(analytic[part].mu, reference[part].mu),
                                relative_error(analytic[part].b, reference[part].b),
                                relative_error(analytic[part].d1, reference[part].d1),
                                relative_error(analytic[part].d2, reference[part].d2)};
        for (int k = 0; k < 4; ++k) worst[part][k] = std::max(worst[part][k], errs[k]);
      }
    }
    for (int part = 0; part < 2; ++part) {
      for (int k = 0; k < 4; ++k) {
        if (param == Parameterization::G1 && k == 2) continue;  // no d1 block
        // mu does not enter 1/2 log|Sigma|; both sides are identically zero.
        if (part == 1 && k == 0) continue;
        const double tol = part == 0 ? kL1Tol : kL2Tol;
        rows.push_back({std::string(to_string(param)), blocks[k], part == 0 ? "L1" : "L2", worst[part][k], tol,
                        instances, worst[part][k] <= tol});
      }
    }
  }
  return rows;
}

}  // namespace manvb::oracle
