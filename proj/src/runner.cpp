#include "manvb/runner.hpp"

#include "manvb/gradients.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>

namespace manvb {

namespace {

constexpr std::uint64_t kStreamInit = 0;
constexpr std::uint64_t kStreamNoise = 1;
constexpr std::uint64_t kStreamPredict = 2;
constexpr std::uint64_t kStreamFolds = 7;
constexpr std::uint64_t kStreamFoldRun = 100;

double trailing_mean(const std::vector<double>& xs, int window) {
  const std::size_t n = xs.size();
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(window));
  double s = 0.0;
  for (std::size_t i = n - k; i < n; ++i) s += xs[i];
  return s / static_cast<double>(k);
}

double prediction_error(const RunConfig& config, const Dataset& data, const VariationalParams& lambda) {
  if (config.predict_draws <= 0) return predict_error(data, lambda.mu());
  Rng rng(derive_seed(config.seed, kStreamPredict));
  Matrix draws(lambda.dim(), config.predict_draws);
  for (int k = 0; k < config.predict_draws; ++k) {
    draws.col(k) = sample_theta(lambda, NoiseDraw::sample(lambda.dim(), lambda.factors(), rng));
  }
  return predict_error_averaged(data, draws);
}

// One fully-formed iteration, or nothing if the draw went non-finite.
struct IterationUpdate {
  double elbo = 0.0;
  VariationalParams lambda;
  OptimizerState state;
};

std::optional<IterationUpdate> iterate(const RunConfig& config, const Model& model, const VariationalParams& lambda,
                                       const OptimizerState& state, Rng& noise_rng) {
  const Index m = lambda.dim();
  const Index p = lambda.factors();
  const LowRankCovariance cov(lambda);

  // Draw noise and estimate the Euclidean gradients.
  EuclideanGrad grad = EuclideanGrad::zeros_like(lambda);
  double log_h_sum = 0.0;
  bool finite = true;
  for (int s = 0; s < config.mc_samples; ++s) {
    const NoiseDraw noise = NoiseDraw::sample(m, p, noise_rng);
    const Vector theta = sample_theta(lambda, noise);
    const LogDensity eval = model.evaluate(theta);
    if (!std::isfinite(eval.value) || !eval.grad.allFinite()) {
      finite = false;
      continue;
    }
    log_h_sum += eval.value;
    grad += grad_l1(lambda, eval.grad, noise);
  }
  if (!finite) return std::nullopt;
  grad *= 1.0 / static_cast<double>(config.mc_samples);
  grad += grad_l2(lambda, cov);
  const double elbo = log_h_sum / static_cast<double>(config.mc_samples) + 0.5 * cov.log_det();
  if (!std::isfinite(elbo) || !grad.all_finite()) return std::nullopt;

  OptimizerState next_state = state;
  try {
    // Euclidean ADADELTA on the unconstrained blocks.
    auto mu_step = step_euclidean_adadelta(lambda.mu(), grad.mu, std::move(next_state.mu), config.hyper);
    next_state.mu = std::move(mu_step.state);
    Vector d1 = lambda.d1();
    if (d1.size() > 0) {
      auto d1_step = step_euclidean_adadelta(d1, grad.d1, std::move(next_state.d1), config.hyper);
      d1 = std::move(d1_step.value);
      next_state.d1 = std::move(d1_step.state);
    }
    auto d2_step = step_euclidean_adadelta(lambda.d2(), grad.d2, std::move(next_state.d2), config.hyper, kD2Floor);
    next_state.d2 = std::move(d2_step.state);

    std::optional<ManifoldPoint> b_next;
    if (config.unconstrained_baseline) {
      const Matrix& bm = lambda.b().matrix();
      const Vector flat_b = Eigen::Map<const Vector>(bm.data(), bm.size());
      const Vector flat_g = Eigen::Map<const Vector>(grad.b.data(), grad.b.size());
      auto b_step = step_euclidean_adadelta(flat_b, flat_g, std::move(next_state.b), config.hyper);
      next_state.b = std::move(b_step.state);
      ++next_state.step_count;
      b_next.emplace(Eigen::Map<const Matrix>(b_step.value.data(), bm.rows(), bm.cols()), ManifoldKind::Euclidean);
    } else {
      RuleStep rs = step_rule(config.rule, lambda.b(), grad.b, std::move(next_state), config.hyper);
      next_state = std::move(rs.state);
      b_next.emplace(std::move(rs.point));
    }
    return IterationUpdate{elbo,
                           VariationalParams(lambda.param(), std::move(mu_step.value), std::move(*b_next),
                                             std::move(d1), std::move(d2_step.value)),
                           std::move(next_state)};
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int worker_count(int tasks) {
  int threads = omp_get_max_threads();
  if (const char* env = std::getenv("MANVB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) threads = v;
  }
  return std::max(1, std::min(threads, tasks));
}

void RunConfig::validate(Index model_dim) const {
  hyper.validate();
  if (p < 1) throw DomainError("p must be >= 1");
  if (model_dim > 0 && p > model_dim) {
    throw DomainError("p = " + std::to_string(p) + " exceeds the model dimension " + std::to_string(model_dim));
  }
  if (max_iters < 0) throw DomainError("max_iters must be >= 0");
  if (mc_samples < 1) throw DomainError("mc_samples must be >= 1");
  if (smooth_window < 1) throw DomainError("smoothing window must be >= 1");
  if (trace_every < 1) throw DomainError("trace interval must be >= 1");
  if (stopping.window < 1) throw DomainError("stopping window must be >= 1");
  if (stopping.check_every < 1) throw DomainError("stopping check interval must be >= 1");
  if (!(stopping.tol > 0.0)) throw DomainError("stopping tolerance must be > 0");
  if (!(prior_sd > 0.0)) throw DomainError("prior_sd must be > 0");
  if (predict_draws < 0) throw DomainError("predict draws must be >= 0");
}

VariationalParams init_lambda(Index model_dim, int p, Parameterization param, std::uint64_t seed,
                              bool unconstrained) {
  if (p < 1 || p > model_dim) {
    throw DomainError("init_lambda: need 1 <= p <= model dimension, got p=" + std::to_string(p));
  }
  Rng rng(derive_seed(seed, kStreamInit));
  const ManifoldPoint drawn = random_point(model_dim, p, manifold_for(param), rng);
  ManifoldPoint b = unconstrained ? ManifoldPoint(drawn.matrix(), ManifoldKind::Euclidean) : drawn;
  return VariationalParams(param, Vector::Zero(model_dim), std::move(b),
                           Vector::Ones(d1_length(param, model_dim, p)), Vector::Constant(model_dim, 0.1));
}

bool check_stopping(std::span<const double> smoothed, const StoppingCriterion& criterion, long iter,
                    long max_iters) {
  if (criterion.kind == StoppingKind::FixedIters) return iter >= max_iters;
  const auto window = static_cast<std::size_t>(criterion.window);
  if (smoothed.size() < window + 1) return false;
  const std::size_t t = smoothed.size() - 1;
  for (std::size_t k = 1; k <= window; ++k) {
    const double ref = smoothed[t - k];
    const double denom = std::max(std::abs(ref), std::numeric_limits<double>::min());
    if (!(std::abs(smoothed[t] - ref) / denom < criterion.tol)) return false;
  }
  return true;
}

std::unique_ptr<Model> make_model(const RunConfig& config, std::shared_ptr<const Dataset> data) {
  if (config.prior == PriorKind::Horseshoe) return std::make_unique<LogisticHorseshoeModel>(std::move(data));
  return std::make_unique<LogisticGaussianModel>(std::move(data), config.prior_sd);
}

RunResult fit(const RunConfig& config, const Model& model) {
  config.validate(model.dim());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  };

  RunResult result{init_lambda(model.dim(), config.p, config.param, config.seed, config.unconstrained_baseline),
                   {}, {}, {}};
  result.max_orth_residual = orth_residual(result.lambda.b().matrix());
  OptimizerState state;
  Rng noise_rng(derive_seed(config.seed, kStreamNoise));
  std::vector<double> stop_series;

  int bad_streak = 0;
  long t = 0;
  while (t < config.max_iters) {
    auto update = iterate(config, model, result.lambda, state, noise_rng);
    if (!update) {
      if (++bad_streak >= kMaxNonFiniteStreak) {
        throw DivergenceError("lower bound stayed non-finite for " + std::to_string(bad_streak) +
                                  " consecutive iterations",
                              result.lambda);
      }
      continue;
    }
    bad_streak = 0;
    result.lambda = std::move(update->lambda);
    state = std::move(update->state);
    ++t;

    result.elbo_samples.push_back(update->elbo);
    const double smooth = trailing_mean(result.elbo_samples, config.smooth_window);
    result.elbo_smoothed.push_back(smooth);
    const double resid = orth_residual(result.lambda.b().matrix());
    result.max_orth_residual = std::max(result.max_orth_residual, resid);

    if (t % config.trace_every == 0) {
      result.trace.push_back({t, update->elbo, smooth, config.record_timing ? static_cast<long>(elapsed_ms()) : 0,
                              resid});
    }
    if (config.stopping.kind == StoppingKind::RelChange && t % config.stopping.check_every == 0) {
      stop_series.push_back(smooth);
      if (t >= config.stopping.min_iters && check_stopping(stop_series, config.stopping)) {
        result.stopped_early = t < config.max_iters;
        break;
      }
    }
  }
  result.iterations = t;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitOutcome run(const RunConfig& config, const Dataset& train, const Dataset* test) {
  auto data = std::make_shared<const Dataset>(train);
  const auto model = make_model(config, data);
  FitOutcome out{fit(config, *model), {}};
  out.metrics.train_error = prediction_error(config, train, out.result.lambda);
  if (test) out.metrics.test_error = prediction_error(config, *test, out.result.lambda);
  out.metrics.iterations = out.result.iterations;
  out.metrics.wall_seconds = out.result.wall_seconds;
  return out;
}

FitOutcome run(const RunConfig& config) {
  if (config.data_path.empty()) throw DomainError("no dataset path given");
  const Dataset train = load_csv(config.data_path, config.csv);
  if (config.test_path.empty()) return run(config, train);
  const Dataset test = load_csv(config.test_path, config.csv);
  if (test.m() != train.m()) throw DimensionError("test set has a different number of columns");
  return run(config, train, &test);
}

std::vector<int> stratified_folds(const Eigen::VectorXd& labels, int folds, std::uint64_t seed) {
  const Index n = labels.size();
  if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  if (folds > n) throw DomainError("more folds than samples");
  std::vector<Index> zeros;
  std::vector<Index> ones;
  for (Index i = 0; i < n; ++i) (labels[i] == 1.0 ? ones : zeros).push_back(i);
  Rng rng(derive_seed(seed, kStreamFolds));
  std::shuffle(zeros.begin(), zeros.end(), rng);
  std::shuffle(ones.begin(), ones.end(), rng);

  std::vector<int> assignment(static_cast<std::size_t>(n));
  std::size_t pos = 0;
  for (const auto* group : {&zeros, &ones}) {
    for (Index i : *group) assignment[static_cast<std::size_t>(i)] = static_cast<int>(pos++ % folds);
  }

  for (int f = 0; f < folds; ++f) {
    Index test_pos = 0, test_count = 0, train_pos = 0, train_count = 0;
    for (Index i = 0; i < n; ++i) {
      const bool in_test = assignment[static_cast<std::size_t>(i)] == f;
      (in_test ? test_count : train_count) += 1;
      if (labels[i] == 1.0) (in_test ? test_pos : train_pos) += 1;
    }
    if (test_pos == 0 || test_pos == test_count || train_pos == 0 || train_pos == train_count) {
      throw StratificationError("fold " + std::to_string(f) + " has a single label class");
    }
  }
  return assignment;
}

std::vector<CvSummary> cross_validate_many(const std::vector<RunConfig>& configs, const Dataset& data) {
  data.validate();
  std::vector<std::vector<int>> assignments;
  for (const auto& config : configs) assignments.push_back(stratified_folds(data.y, config.cv_folds, config.seed));

  struct Task {
    std::size_t config;
    int fold;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < configs.size(); ++c)
    for (int f = 0; f < configs[c].cv_folds; ++f) tasks.push_back({c, f});

  std::vector<RunMetrics> metrics(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const int threads = worker_count(static_cast<int>(tasks.size()));

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    try {
      const auto& task = tasks[k];
      const auto& assignment = assignments[task.config];
      std::vector<Index> train_rows, test_rows;
      for (Index i = 0; i < data.n(); ++i) {
        (assignment[static_cast<std::size_t>(i)] == task.fold ? test_rows : train_rows).push_back(i);
      }
      RunConfig fold_config = configs[task.config];
      fold_config.seed = derive_seed(configs[task.config].seed, kStreamFoldRun + static_cast<std::uint64_t>(task.fold));
      const Dataset train = data.subset(train_rows);
      const Dataset test = data.subset(test_rows);
      metrics[k] = run(fold_config, train, &test).metrics;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<CvSummary> out(configs.size());
  for (std::size_t k = 0; k < tasks.size(); ++k) out[tasks[k].config].folds.push_back({tasks[k].fold, metrics[k]});

  for (auto& summary : out) {
    const double count = static_cast<double>(summary.folds.size());
    auto mean_sd = [&](auto&& get, double& mean, double& sd) {
      mean = 0.0;
      for (const auto& f : summary.folds) mean += get(f);
      mean /= count;
      double ss = 0.0;
      for (const auto& f : summary.folds) ss += (get(f) - mean) * (get(f) - mean);
      sd = count > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    };
    double unused = 0.0;
    mean_sd([](const FoldResult& f) { return f.metrics.train_error; }, summary.mean_train_error,
            summary.sd_train_error);
    mean_sd([](const FoldResult& f) { return f.metrics.test_error.value_or(0.0); }, summary.mean_test_error,
            summary.sd_test_error);
    mean_sd([](const FoldResult& f) { return f.metrics.wall_seconds; }, summary.mean_wall_seconds, unused);
  }
  return out;
}

CvSummary cross_validate(const RunConfig& config, const Dataset& data) {
  return cross_validate_many({config}, data).front();
}

CvSummary cross_validate(const RunConfig& config) {
  if (config.data_path.empty()) throw DomainError("no dataset path given");
  return cross_validate(config, load_csv(config.data_path, config.csv));
}

}  // namespace manvb
