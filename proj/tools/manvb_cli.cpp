// manvb: command-line front end.
//
//   manvb fit   --data train.csv [--test test.csv] [options]
//   manvb cv    --data data.csv [options]
//   manvb sweep --data data.csv [--params S,G1,G2] [--rules ...] [--vafc]
//   manvb check [--instances 20] [--seed 1]
//
// Exit status: 0 success, 2 divergence, 3 input error.

#include "manvb/oracle.hpp"
#include "manvb/runner.hpp"
#include "manvb/trace_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitDivergence = 2;
constexpr int kExitInput = 3;

struct Options {
  manvb::RunConfig config;
  std::string param = "G1";
  std::string rule = "rmsprop";
  std::string stopping = "fixed";
  std::string prior = "gaussian";
  std::string predict = "plugin";
  std::string summary_path;
  std::string checkpoint_path;
  bool header = false;
  bool no_header = false;
  bool no_standardize = false;
  bool no_timing = false;

  // sweep
  std::string params_list = "S,G1,G2";
  std::string rules_list = "rgd-basic,crgd-m,rmsprop,rgd-adadelta";

  // check
  int instances = 20;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_run_flags(CLI::App* app, Options& o) {
  auto& c = o.config;
  app->add_option("--data", c.data_path, "Training CSV (label in the last column by default)")->required();
  app->add_option("--label-col", c.csv.label_column, "Label column index; negative counts from the end");
  app->add_flag("--header", o.header, "First row is a header");
  app->add_flag("--no-header", o.no_header, "First row is data");
  app->add_flag("--no-standardize", o.no_standardize, "Keep raw feature scales");
  app->add_option("-p,--factors", c.p, "Number of factors p");
  app->add_option("--iters", c.max_iters, "Maximum iterations");
  app->add_option("--mc-samples", c.mc_samples, "Noise draws per gradient estimate");
  app->add_option("--eta", c.hyper.eta, "Step size for the B update");
  app->add_option("--zeta", c.hyper.zeta, "Momentum / decay factor");
  app->add_option("--epsilon", c.hyper.epsilon, "RMSProp stabiliser");
  app->add_option("--rho", c.hyper.adadelta_rho, "ADADELTA decay");
  app->add_option("--adadelta-eps", c.hyper.adadelta_eps, "ADADELTA stabiliser");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--stopping", o.stopping, "fixed | rel-change")
      ->check(CLI::IsMember({"fixed", "rel-change"}));
  app->add_option("--stop-window", c.stopping.window, "Lags compared by rel-change");
  app->add_option("--stop-tol", c.stopping.tol, "Relative-change tolerance");
  app->add_option("--stop-min-iters", c.stopping.min_iters, "Iterations before rel-change is consulted");
  app->add_option("--stop-every", c.stopping.check_every, "Spacing of the series seen by rel-change");
  app->add_option("--prior", o.prior, "gaussian | horseshoe")->check(CLI::IsMember({"gaussian", "horseshoe"}));
  app->add_option("--prior-sd", c.prior_sd, "Gaussian prior standard deviation");
  app->add_option("--smooth", c.smooth_window, "Trailing window for the smoothed ELBO");
  app->add_option("--predict", o.predict, "plugin | mc:K");
  app->add_option("--summary", o.summary_path, "Write a JSON summary here");
}

void add_single_run_flags(CLI::App* app, Options& o) {
  app->add_option("--param", o.param, "S | G1 | G2");
  app->add_option("--rule", o.rule, "rgd-basic | crgd-m | rmsprop | rgd-adadelta");
  app->add_flag("--vafc", o.config.unconstrained_baseline, "Unconstrained B with Euclidean ADADELTA");
}

manvb::Parameterization parse_param_or_throw(const std::string& text) {
  const auto p = manvb::parse_parameterization(text);
  if (!p) throw manvb::DomainError("unknown parameterization '" + text + "'");
  return *p;
}

manvb::RuleKind parse_rule_or_throw(const std::string& text) {
  const auto r = manvb::parse_rule(text);
  if (!r) throw manvb::DomainError("unknown rule '" + text + "'");
  return *r;
}

// Fills the RunConfig fields that arrive as strings or flags.
void finish_config(Options& o) {
  auto& c = o.config;
  c.param = parse_param_or_throw(o.param);
  c.rule = parse_rule_or_throw(o.rule);
  c.stopping.kind = o.stopping == "rel-change" ? manvb::StoppingKind::RelChange : manvb::StoppingKind::FixedIters;
  c.prior = o.prior == "horseshoe" ? manvb::PriorKind::Horseshoe : manvb::PriorKind::Gaussian;
  c.record_timing = !o.no_timing;
  c.csv.standardize = !o.no_standardize;
  if (o.header && o.no_header) throw manvb::DomainError("--header and --no-header are exclusive");
  if (o.header) c.csv.header = manvb::CsvOptions::Header::Present;
  if (o.no_header) c.csv.header = manvb::CsvOptions::Header::Absent;
  if (o.predict == "plugin") {
    c.predict_draws = 0;
  } else if (o.predict.rfind("mc:", 0) == 0) {
    try {
      c.predict_draws = std::stoi(o.predict.substr(3));
    } catch (const std::exception&) {
      throw manvb::DomainError("bad --predict value '" + o.predict + "'");
    }
    if (c.predict_draws < 1) throw manvb::DomainError("--predict mc:K needs K >= 1");
  } else {
    throw manvb::DomainError("bad --predict value '" + o.predict + "'");
  }
}

manvb::Dataset load(const std::string& path, const manvb::CsvOptions& options) {
  manvb::CsvLoadReport report;
  manvb::Dataset data = manvb::load_csv(path, options, &report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  return data;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw manvb::Error("cannot write summary '" + path + "'");
  out << j.dump(2) << "\n";
}

std::string method_name(const manvb::RunConfig& c) {
  if (c.unconstrained_baseline) return "VAFC";
  return std::string(manvb::to_string(c.param)) + "-" + std::string(manvb::display_name(c.rule));
}

int cmd_fit(Options& o) {
  finish_config(o);
  const auto& c = o.config;
  const manvb::Dataset train = load(c.data_path, c.csv);
  std::optional<manvb::Dataset> test;
  if (!c.test_path.empty()) {
    test = load(c.test_path, c.csv);
    if (test->m() != train.m()) throw manvb::DimensionError("test set has a different number of columns");
  }
  const manvb::FitOutcome out = manvb::run(c, train, test ? &*test : nullptr);
  if (!c.trace_path.empty()) manvb::write_trace_csv(c.trace_path, out.result.trace, out.result.lambda.dim());
  if (!o.checkpoint_path.empty()) manvb::write_checkpoint(o.checkpoint_path, out.result.lambda);

  std::printf("method        %s\n", method_name(c).c_str());
  std::printf("iterations    %ld%s\n", out.result.iterations, out.result.stopped_early ? " (stopped early)" : "");
  std::printf("train error   %.4f\n", out.metrics.train_error);
  if (out.metrics.test_error) std::printf("test error    %.4f\n", *out.metrics.test_error);
  if (!out.result.elbo_smoothed.empty()) std::printf("final elbo    %.6g\n", out.result.elbo_smoothed.back());
  std::printf("max |BtB-I|  %.3g\n", out.result.max_orth_residual);
  std::printf("time          %.2f s\n", out.metrics.wall_seconds);

  write_json(o.summary_path, {{"config", manvb::config_to_json(c)},
                              {"metrics", manvb::metrics_to_json(out.metrics)},
                              {"stopped_early", out.result.stopped_early},
                              {"max_orth_residual", out.result.max_orth_residual},
                              {"final_elbo_smooth", out.result.elbo_smoothed.empty()
                                                        ? nlohmann::json(nullptr)
                                                        : nlohmann::json(out.result.elbo_smoothed.back())}});
  return 0;
}

void print_cv_row(const std::string& name, const manvb::CvSummary& s) {
  std::printf("%-18s %8.4f %8.4f %8.4f %8.4f %10.2f\n", name.c_str(), s.mean_train_error, s.sd_train_error,
              s.mean_test_error, s.sd_test_error, s.mean_wall_seconds);
}

void print_cv_header() {
  std::printf("%-18s %8s %8s %8s %8s %10s\n", "method", "train", "sd", "test", "sd", "time[s]");
}

int cmd_cv(Options& o) {
  finish_config(o);
  const auto& c = o.config;
  const manvb::Dataset data = load(c.data_path, c.csv);
  const manvb::CvSummary s = manvb::cross_validate(c, data);
  print_cv_header();
  print_cv_row(method_name(c), s);
  write_json(o.summary_path, {{"config", manvb::config_to_json(c)}, {"cv", manvb::cv_to_json(s)}});
  return 0;
}

int cmd_sweep(Options& o) {
  finish_config(o);
  const manvb::Dataset data = load(o.config.data_path, o.config.csv);
  std::vector<manvb::RunConfig> configs;
  for (const auto& ps : split_list(o.params_list)) {
    for (const auto& rs : split_list(o.rules_list)) {
      manvb::RunConfig c = o.config;
      c.unconstrained_baseline = false;
      c.param = parse_param_or_throw(ps);
      c.rule = parse_rule_or_throw(rs);
      configs.push_back(c);
    }
  }
  if (o.config.unconstrained_baseline) {
    manvb::RunConfig c = o.config;
    c.param = manvb::Parameterization::G1;
    configs.push_back(c);
  }
  if (configs.empty()) throw manvb::DomainError("empty sweep grid");

  const auto results = manvb::cross_validate_many(configs, data);
  print_cv_header();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    print_cv_row(method_name(configs[i]), results[i]);
    rows.push_back({{"method", method_name(configs[i])}, {"cv", manvb::cv_to_json(results[i])}});
  }
  write_json(o.summary_path, {{"config", manvb::config_to_json(o.config)}, {"results", rows}});
  return 0;
}

int cmd_check(const Options& o) {
  const auto rows = manvb::oracle::run_gradient_check(o.instances, o.config.seed);
  bool all = true;
  std::printf("%-6s %-6s %-4s %12s %10s  %s\n", "param", "block", "part", "max_rel_err", "tol", "status");
  for (const auto& r : rows) {
    std::printf("%-6s %-6s %-4s %12.3e %10.1e  %s\n", r.param.c_str(), r.block.c_str(), r.part.c_str(),
                r.max_rel_err, r.tol, r.pass ? "ok" : "FAIL");
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold-constrained Gaussian variational approximation"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit one model");
  add_run_flags(fit, o);
  add_single_run_flags(fit, o);
  fit->add_option("--test", o.config.test_path, "Held-out CSV");
  fit->add_option("--trace", o.config.trace_path, "Write the ELBO trace CSV here");
  fit->add_option("--trace-every", o.config.trace_every, "Trace row interval");
  fit->add_flag("--no-timing", o.no_timing, "Write wall_ms as 0 (byte-reproducible traces)");
  fit->add_option("--checkpoint", o.checkpoint_path, "Write the final parameters here");

  auto* cv = app.add_subcommand("cv", "Stratified K-fold cross-validation");
  add_run_flags(cv, o);
  add_single_run_flags(cv, o);
  cv->add_option("--folds", o.config.cv_folds, "Number of folds");

  auto* sweep = app.add_subcommand("sweep", "Cross-validate a grid of parameterizations and rules");
  add_run_flags(sweep, o);
  sweep->add_option("--folds", o.config.cv_folds, "Number of folds");
  sweep->add_option("--params", o.params_list, "Comma-separated parameterizations");
  sweep->add_option("--rules", o.rules_list, "Comma-separated rules");
  sweep->add_flag("--vafc", o.config.unconstrained_baseline, "Add the unconstrained baseline row");

  auto* check = app.add_subcommand("check", "Compare analytic gradients with finite differences");
  check->add_option("--instances", o.instances, "Random instances per parameterization");
  check->add_option("--seed", o.config.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*cv) return cmd_cv(o);
    if (*sweep) return cmd_sweep(o);
    return cmd_check(o);
  } catch (const manvb::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!o.checkpoint_path.empty()) {
      try {
        manvb::write_checkpoint(o.checkpoint_path, e.last_good());
        std::cerr << "last finite parameters written to " << o.checkpoint_path << "\n";
      } catch (const std::exception& inner) {
        std::cerr << "error: " << inner.what() << "\n";
      }
    }
    return kExitDivergence;
  } catch (const manvb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
