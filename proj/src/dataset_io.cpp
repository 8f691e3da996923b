#include "manvb/dataset.hpp"

#include "manvb/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

namespace manvb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (x.rows() < 1) throw DomainError("dataset is empty");
  if (x.rows() != y.size()) throw DomainError("dataset: X and y have different row counts");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("dataset has non-finite entries");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw DomainError("dataset labels must be 0 or 1");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Eigen::Index r = rows[k];
    if (r < 0 || r >= x.rows()) throw DimensionError("dataset subset: row index out of range");
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(r);
    out.y[static_cast<Eigen::Index>(k)] = y[r];
  }
  out.column_names = column_names;
  return out;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options, CsvLoadReport* report) {
  CsvLoadReport local;
  CsvLoadReport& rep = report ? *report : local;

  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> header;
  std::size_t width = 0;
  std::size_t line_no = 0;

  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);

    if (first) {
      first = false;
      width = fields.size();
      bool numeric = true;
      for (auto f : fields) numeric = numeric && parse_number(f).has_value();
      const bool is_header = options.header == CsvOptions::Header::Present ||
                             (options.header == CsvOptions::Header::Detect && !numeric);
      if (is_header) {
        for (auto f : fields) header.emplace_back(f);
        continue;
      }
    }
    if (fields.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = parse_number(fields[c]);
      if (!v) throw ParseError("non-numeric cell '" + std::string(fields[c]) + "'", line_no);
      row[c] = *v;
    }
    rows.push_back(std::move(row));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw ParseError("no data rows", 0);
  if (width < 2) throw ParseError("need at least one feature column and a label column", 0);

  const int w = static_cast<int>(width);
  const int label_col = options.label_column < 0 ? w + options.label_column : options.label_column;
  if (label_col < 0 || label_col >= w) throw ParseError("label column index out of range", 0);

  // Labels: {0,1} as is, {-1,+1} remapped.
  bool has_minus_one = false;
  bool has_zero = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double v = rows[r][label_col];
    if (v == -1.0) {
      has_minus_one = true;
    } else if (v == 0.0) {
      has_zero = true;
    } else if (v != 1.0) {
      throw ParseError("unknown label " + std::to_string(v) + " (expected 0/1 or -1/+1)", line_numbers[r]);
    }
  }
  if (has_minus_one && has_zero) throw ParseError("labels mix 0 and -1", 0);
  if (has_minus_one) {
    rep.labels_remapped = true;
    rep.warnings.push_back("labels in {-1,+1} mapped to {0,1}");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  std::vector<int> feature_cols;
  for (int c = 0; c < w; ++c)
    if (c != label_col) feature_cols.push_back(c);

  auto column_name = [&](int c) { return header.empty() ? "x" + std::to_string(c) : header[c]; };

  std::vector<int> kept;
  for (int c : feature_cols) {
    bool constant = true;
    for (Eigen::Index r = 1; r < n && constant; ++r) constant = rows[r][c] == rows[0][c];
    if (constant && options.standardize) {
      rep.dropped_constant.push_back(column_name(c));
      rep.warnings.push_back("dropped constant column '" + column_name(c) + "'");
      continue;
    }
    kept.push_back(c);
  }

  const Eigen::Index offset = options.add_intercept ? 1 : 0;
  Dataset data;
  data.x.resize(n, static_cast<Eigen::Index>(kept.size()) + offset);
  data.y.resize(n);
  if (options.add_intercept) {
    data.x.col(0).setOnes();
    data.column_names.emplace_back("(intercept)");
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const int c = kept[k];
    auto col = data.x.col(static_cast<Eigen::Index>(k) + offset);
    for (Eigen::Index r = 0; r < n; ++r) col[r] = rows[r][c];
    if (options.standardize) {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      col = (col.array() - mean) / sd;
    }
    data.column_names.push_back(column_name(c));
  }
  for (Eigen::Index r = 0; r < n; ++r) data.y[r] = rows[r][label_col] == 1.0 ? 1.0 : 0.0;
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options, CsvLoadReport* report) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str(), options, report);
}

}  // namespace manvb
