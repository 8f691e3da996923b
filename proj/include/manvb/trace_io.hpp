#pragma once

#include "manvb/runner.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>

namespace manvb {

/// Trace CSV: one '#' comment line noting the dropped ELBO constant, then
/// the header `iter,elbo_sample,elbo_smooth,wall_ms,orth_residual` and one
/// row per record. Reals are printed with 17 significant digits.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, Index model_dim);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace, Index model_dim);

nlohmann::json config_to_json(const RunConfig& config);
nlohmann::json metrics_to_json(const RunMetrics& metrics);
nlohmann::json cv_to_json(const CvSummary& summary);

// Checkpoint layout (little-endian host order):
//   char[8]  magic "MANVBCK1"
//   uint32   parameterization (0 = S, 1 = G1, 2 = G2)
//   uint32   manifold kind    (0 = Stiefel, 1 = Grassmann, 2 = Euclidean)
//   uint64   m, p, d1 length
//   double   mu[m], B[m*p] row-major, d1[len], d2[m]
void write_checkpoint(std::ostream& out, const VariationalParams& lambda);
void write_checkpoint(const std::filesystem::path& path, const VariationalParams& lambda);
VariationalParams read_checkpoint(std::istream& in);
VariationalParams read_checkpoint(const std::filesystem::path& path);

}  // namespace manvb
