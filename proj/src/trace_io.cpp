#include "manvb/trace_io.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

namespace manvb {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'A', 'N', 'V', 'B', 'C', 'K', '1'};

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError("checkpoint truncated", 0);
  return v;
}

std::string stopping_name(StoppingKind kind) { return kind == StoppingKind::RelChange ? "rel_change" : "fixed_iters"; }

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, Index model_dim) {
  out << "# elbo columns omit the additive constant -(m/2)(log(2*pi)+1) with m=" << model_dim << "\n";
  out << "iter,elbo_sample,elbo_smooth,wall_ms,orth_residual\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_real(r.elbo_sample) << ',' << format_real(r.elbo_smooth) << ',' << r.wall_ms
        << ',' << format_real(r.orth_residual) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace, Index model_dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace file '" + path.string() + "'");
  write_trace_csv(out, trace, model_dim);
}

nlohmann::json config_to_json(const RunConfig& c) {
  return {
      {"parameterization", std::string(to_string(c.param))},
      {"rule", c.unconstrained_baseline ? "VAFC" : std::string(display_name(c.rule))},
      {"unconstrained_baseline", c.unconstrained_baseline},
      {"p", c.p},
      {"max_iters", c.max_iters},
      {"mc_samples", c.mc_samples},
      {"seed", c.seed},
      {"cv_folds", c.cv_folds},
      {"hyper",
       {{"eta", c.hyper.eta},
        {"zeta", c.hyper.zeta},
        {"epsilon", c.hyper.epsilon},
        {"adadelta_rho", c.hyper.adadelta_rho},
        {"adadelta_eps", c.hyper.adadelta_eps}}},
      {"stopping",
       {{"kind", stopping_name(c.stopping.kind)},
        {"window", c.stopping.window},
        {"tol", c.stopping.tol},
        {"min_iters", c.stopping.min_iters},
        {"check_every", c.stopping.check_every}}},
      {"smooth_window", c.smooth_window},
      {"trace_every", c.trace_every},
      {"prior", c.prior == PriorKind::Horseshoe ? "horseshoe" : "gaussian"},
      {"prior_sd", c.prior_sd},
      {"predict_draws", c.predict_draws},
      {"data", c.data_path},
      {"test", c.test_path},
  };
}

nlohmann::json metrics_to_json(const RunMetrics& m) {
  nlohmann::json j = {{"train_error", m.train_error}, {"iterations", m.iterations}, {"wall_seconds", m.wall_seconds}};
  j["test_error"] = m.test_error ? nlohmann::json(*m.test_error) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json cv_to_json(const CvSummary& s) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : s.folds) {
    auto j = metrics_to_json(f.metrics);
    j["fold"] = f.fold;
    folds.push_back(std::move(j));
  }
  return {{"folds", std::move(folds)},
          {"mean_train_error", s.mean_train_error},
          {"sd_train_error", s.sd_train_error},
          {"mean_test_error", s.mean_test_error},
          {"sd_test_error", s.sd_test_error},
          {"mean_wall_seconds", s.mean_wall_seconds}};
}

void write_checkpoint(std::ostream& out, const VariationalParams& lambda) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lambda.param()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lambda.b().kind()));
  const Index m = lambda.dim();
  const Index p = lambda.factors();
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(lambda.d1().size()));
  for (Index i = 0; i < m; ++i) put(out, lambda.mu()[i]);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < p; ++j) put(out, lambda.b().matrix()(i, j));
  for (Index i = 0; i < lambda.d1().size(); ++i) put(out, lambda.d1()[i]);
  for (Index i = 0; i < m; ++i) put(out, lambda.d2()[i]);
  if (!out) throw Error("checkpoint write failed");
}

void write_checkpoint(const std::filesystem::path& path, const VariationalParams& lambda) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, lambda);
}

VariationalParams read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a checkpoint file (bad magic)", 0);
  const auto param = get<std::uint32_t>(in);
  const auto kind = get<std::uint32_t>(in);
  if (param > 2 || kind > 2) throw ParseError("checkpoint has an unknown parameterization or manifold tag", 0);
  const auto m = static_cast<Index>(get<std::uint64_t>(in));
  const auto p = static_cast<Index>(get<std::uint64_t>(in));
  const auto d1_len = static_cast<Index>(get<std::uint64_t>(in));
  Vector mu(m), d1(d1_len), d2(m);
  Matrix b(m, p);
  for (Index i = 0; i < m; ++i) mu[i] = get<double>(in);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < p; ++j) b(i, j) = get<double>(in);
  for (Index i = 0; i < d1_len; ++i) d1[i] = get<double>(in);
  for (Index i = 0; i < m; ++i) d2[i] = get<double>(in);
  return VariationalParams(static_cast<Parameterization>(param), std::move(mu),
                           ManifoldPoint(std::move(b), static_cast<ManifoldKind>(kind), kDriftTol), std::move(d1),
                           std::move(d2));
}

VariationalParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path.string() + "'", 0);
  return read_checkpoint(in);
}

}  // namespace manvb
