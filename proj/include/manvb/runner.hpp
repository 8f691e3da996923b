#pragma once

// Driver for the manifold-constrained variational fit: initialise lambda,
// then per iteration draw noise, form Euclidean gradients, move mu/d1/d2 by
// ADADELTA and B by the chosen manifold rule, until the stopping rule fires.

#include "manvb/dataset.hpp"
#include "manvb/factor_gaussian.hpp"
#include "manvb/model.hpp"
#include "manvb/optimizers.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace manvb {

enum class PriorKind { Gaussian, Horseshoe };

enum class StoppingKind { FixedIters, RelChange };

struct StoppingCriterion {
  StoppingKind kind = StoppingKind::FixedIters;
  /// Number of trailing lags compared by the relative-change rule.
  int window = 5;
  double tol = 0.1;
  /// The relative-change rule is not consulted before this many iterations.
  long min_iters = 0;
  /// Spacing, in iterations, of the smoothed-ELBO series the rule sees.
  long check_every = 1;
};

struct RunConfig {
  Parameterization param = Parameterization::G1;
  RuleKind rule = RuleKind::RmsProp;
  /// Reference mode: B unconstrained (Euclidean ADADELTA, identity geometry)
  /// with Sigma = B B^T + D2^2.
  bool unconstrained_baseline = false;
  int p = 4;
  long max_iters = 5000;
  int mc_samples = 1;
  HyperParams hyper;
  std::uint64_t seed = 1;
  int cv_folds = 5;
  StoppingCriterion stopping;
  int smooth_window = 100;
  int trace_every = 10;
  /// When false the trace's wall_ms column is written as 0 so trace files
  /// are byte-comparable between runs.
  bool record_timing = true;

  PriorKind prior = PriorKind::Gaussian;
  double prior_sd = 10.0;
  /// 0: plug-in prediction with mu. K > 0: average sigmoid over K draws from q.
  int predict_draws = 0;

  std::string data_path;
  std::string test_path;
  std::string trace_path;
  CsvOptions csv;

  /// Throws DomainError on inconsistent settings. `model_dim` is checked
  /// against p when positive.
  void validate(Index model_dim = 0) const;
};

struct TraceRecord {
  long iter = 0;
  double elbo_sample = 0.0;
  double elbo_smooth = 0.0;
  long wall_ms = 0;
  double orth_residual = 0.0;
};

struct RunResult {
  VariationalParams lambda;
  std::vector<TraceRecord> trace;
  /// Per-iteration raw single-draw ELBO estimates and their trailing means.
  std::vector<double> elbo_samples;
  std::vector<double> elbo_smoothed;
  long iterations = 0;
  bool stopped_early = false;
  double wall_seconds = 0.0;
  double max_orth_residual = 0.0;
};

struct RunMetrics {
  double train_error = 0.0;
  std::optional<double> test_error;
  long iterations = 0;
  double wall_seconds = 0.0;
};

struct FitOutcome {
  RunResult result;
  RunMetrics metrics;
};

/// Thrown when the ELBO stays non-finite for too many consecutive
/// iterations. Carries the last parameters that produced a finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, VariationalParams last_good)
      : Error(what), last_good_(std::move(last_good)) {}
  const VariationalParams& last_good() const noexcept { return last_good_; }

 private:
  VariationalParams last_good_;
};

inline constexpr int kMaxNonFiniteStreak = 50;

/// mu = 0, B = random_point, d1 = 1, d2 = 0.1. With `unconstrained` B is
/// drawn the same way but placed in the Euclidean geometry.
VariationalParams init_lambda(Index model_dim, int p, Parameterization param, std::uint64_t seed,
                              bool unconstrained = false);

/// Relative-change rule: true when |s_t - s_{t-k}| / max(|s_{t-k}|, tiny) < tol
/// for every k = 1..window, where s_t is the last entry of `smoothed`.
/// Fixed-iteration rule: true when iter >= max_iters.
bool check_stopping(std::span<const double> smoothed, const StoppingCriterion& criterion, long iter = 0,
                    long max_iters = 0);

/// Builds the target for `data` according to config.prior / prior_sd.
std::unique_ptr<Model> make_model(const RunConfig& config, std::shared_ptr<const Dataset> data);

/// Runs the optimisation loop against an arbitrary model.
RunResult fit(const RunConfig& config, const Model& model);

/// Fits a logistic model on `train` and scores it on `train` / `test`.
FitOutcome run(const RunConfig& config, const Dataset& train, const Dataset* test = nullptr);

/// Loads config.data_path (and config.test_path when set) and calls run().
FitOutcome run(const RunConfig& config);

/// Fold id per sample: each class is shuffled (seeded) and the concatenation
/// is dealt round-robin, so folds are stratified and differ in size by at
/// most one. Throws StratificationError when a training or test split would
/// hold a single class.
std::vector<int> stratified_folds(const Eigen::VectorXd& labels, int folds, std::uint64_t seed);

struct FoldResult {
  int fold = 0;
  RunMetrics metrics;
};

struct CvSummary {
  std::vector<FoldResult> folds;
  double mean_train_error = 0.0;
  double sd_train_error = 0.0;
  double mean_test_error = 0.0;
  double sd_test_error = 0.0;
  double mean_wall_seconds = 0.0;
};

/// Stratified K-fold cross-validation. Folds run in parallel; each fold
/// seeds its own stream from (seed, fold id).
CvSummary cross_validate(const RunConfig& config, const Dataset& data);
CvSummary cross_validate(const RunConfig& config);

/// Cross-validates several configurations on the same data, scheduling every
/// (configuration, fold) pair on one worker pool.
std::vector<CvSummary> cross_validate_many(const std::vector<RunConfig>& configs, const Dataset& data);

/// Seed for an independent stream (fold, sweep cell, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Worker-pool size: MANVB_THREADS when set, otherwise the OpenMP default,
/// capped at `tasks`.
int worker_count(int tasks);

}  // namespace manvb
