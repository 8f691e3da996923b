// Serial reference vs OpenMP kernels. Results are bitwise equal (see
// test_kernels); this only measures time.

#include "manvb/kernels.hpp"
#include "manvb/manifold.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace manvb;
using namespace manvb::kernels;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Vector random_labels(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = coin(rng);
  return y;
}

void logistic(benchmark::State& state, Backend backend) {
  const Index n = state.range(0), m = state.range(1);
  const Matrix x = random_matrix(n, m, 1);
  const Vector y = random_labels(n, 2);
  const Vector beta = 0.1 * random_matrix(m, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(logistic_loglik(backend, x, y, beta));
  state.SetItemsProcessed(state.iterations() * n * m);
}

void gram(benchmark::State& state, Backend backend) {
  const Index m = state.range(0), p = state.range(1);
  const Matrix a = random_matrix(m, p, 4);
  const Vector w = random_matrix(m, 1, 5).col(0).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(weighted_gram(backend, a, w));
  state.SetItemsProcessed(state.iterations() * m * p * p);
}

void rowdot(benchmark::State& state, Backend backend) {
  const Index m = state.range(0), p = state.range(1);
  const Matrix a = random_matrix(m, p, 6), b = random_matrix(m, p, 7);
  for (auto _ : state) benchmark::DoNotOptimize(rowwise_dot(backend, a, b));
  state.SetItemsProcessed(state.iterations() * m * p);
}

}  // namespace

// ionosphere-sized and leukemia-sized shapes
BENCHMARK_CAPTURE(logistic, serial, Backend::Serial)->Args({351, 112})->Args({38, 7130})->Args({20000, 100});
BENCHMARK_CAPTURE(logistic, omp, Backend::OpenMP)->Args({351, 112})->Args({38, 7130})->Args({20000, 100});
BENCHMARK_CAPTURE(gram, serial, Backend::Serial)->Args({112, 4})->Args({14261, 4})->Args({14261, 30});
BENCHMARK_CAPTURE(gram, omp, Backend::OpenMP)->Args({112, 4})->Args({14261, 4})->Args({14261, 30});
BENCHMARK_CAPTURE(rowdot, serial, Backend::Serial)->Args({14261, 4})->Args({100000, 8});
BENCHMARK_CAPTURE(rowdot, omp, Backend::OpenMP)->Args({14261, 4})->Args({100000, 8});

BENCHMARK_MAIN();
