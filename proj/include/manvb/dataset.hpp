#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace manvb {

/// Binary-classification data. `x` carries the intercept column when one was
/// requested at load time; `y` holds labels in {0, 1}.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;

  Eigen::Index n() const noexcept { return x.rows(); }
  Eigen::Index m() const noexcept { return x.cols(); }

  /// Throws DomainError on empty data, non-finite entries, shape mismatch or
  /// labels outside {0, 1}.
  void validate() const;

  /// Rows selected by `rows`, in the given order.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

struct CsvOptions {
  /// Column holding the label; negative values count from the end.
  int label_column = -1;
  /// Detect treats the first row as a header when it has a non-numeric cell.
  enum class Header { Detect, Present, Absent } header = Header::Detect;
  /// Standardise every feature to zero mean, unit (population) variance.
  bool standardize = true;
  bool add_intercept = true;
};

struct CsvLoadReport {
  std::vector<std::string> dropped_constant;
  bool labels_remapped = false;  // {-1, +1} mapped to {0, 1}
  std::vector<std::string> warnings;
};

/// Reads a rectangular numeric CSV. Constant feature columns are dropped
/// when standardising; {-1, +1} labels are mapped to {0, 1}. Throws
/// ParseError with the offending line number on ragged rows, non-numeric
/// cells or unknown labels.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {},
                 CsvLoadReport* report = nullptr);

/// Same as load_csv but from in-memory text.
Dataset parse_csv(const std::string& text, const CsvOptions& options = {}, CsvLoadReport* report = nullptr);

}  // namespace manvb
