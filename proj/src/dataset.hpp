#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hifi {

struct CsvOptions {
  std::string target;
  // Carried through to reports, excluded from modeling.
  std::vector<std::string> id_columns;
  // Dropped entirely.
  std::vector<std::string> exclude_columns;
  // Reject rows with a missing cell unless set, in which case they are dropped.
  bool drop_missing_rows = false;
};

// Parsed but unscaled table. Columns are stored column-major.
struct RawTable {
  std::vector<std::string> column_order;  // every header column, input order
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;
  std::string target_name;
  std::vector<double> target;
  std::vector<std::string> id_names;
  std::vector<std::vector<std::string>> ids;
  std::vector<std::string> excluded_columns;
  // 1-based data row numbers (header excluded) of dropped rows.
  std::vector<size_t> dropped_rows;

  size_t n_rows() const { return target.size(); }
  size_t n_features() const { return feature_names.size(); }
};

RawTable LoadCsv(const std::filesystem::path& path, const CsvOptions& options);
RawTable ParseCsv(std::istream& in, const CsvOptions& options,
                  const std::string& source = "<stream>");
void WriteCsv(const RawTable& table, const std::filesystem::path& path);

struct ColumnReport {
  std::string name;
  std::string role;  // feature, target, id, excluded
  double mean = 0.0;
  double sd = 0.0;
  std::string note;
};

struct StandardizationReport {
  std::vector<ColumnReport> columns;  // one entry per input column
  std::vector<size_t> dropped_rows;

  const ColumnReport* Find(const std::string& name) const;
};

// N x p standardized features plus target. Immutable after construction.
class Dataset {
 public:
  // Throws unless the inputs are finite, N >= 2, p >= 1, and every column and
  // the target already have mean 0 and sample sd 1 within 1e-9.
  Dataset(Eigen::MatrixXd values, Eigen::VectorXd target,
          std::vector<std::string> feature_names);

  size_t n_patterns() const { return static_cast<size_t>(values_.rows()); }
  size_t n_features() const { return static_cast<size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::VectorXd& target() const { return target_; }
  auto column(size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  // -1 when absent.
  int FeatureIndex(const std::string& name) const;

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd target_;
  std::vector<std::string> feature_names_;
};

// z-scores each feature and the target with divisor N-1.
std::pair<Dataset, StandardizationReport> Standardize(const RawTable& table);

// Sample mean and sd (divisor N-1).
std::pair<double, double> SampleMoments(std::span<const double> values);

}  // namespace hifi
