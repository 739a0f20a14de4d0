#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "csv_format.hpp"
#include "error.hpp"

namespace hifi {
namespace {

constexpr double kStandardizedTolerance = 1e-9;

// Splits one CSV record. Handles quoted fields with doubled-quote escapes.
// Returns false when a quoted field is left open at end of line.
bool SplitRecord(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return !quoted;
}

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool IsMissing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

bool ParseNumber(const std::string& cell, double& value) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

}  // namespace

RawTable LoadCsv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open input file '" + path.string() + "'");
  return ParseCsv(in, options, path.string());
}

RawTable ParseCsv(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kIo, source + ": empty file, header row expected");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  if (!SplitRecord(line, header)) Fail(ErrorCode::kIo, source + ": unterminated quote in header");
  for (auto& h : header) h = Trim(h);
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) Fail(ErrorCode::kIo, source + ": duplicate column '" + h + "'");
    }
  }

  auto column_of = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  if (options.target.empty()) Fail(ErrorCode::kConfig, "no target column given");
  const int target_col = column_of(options.target);
  if (target_col < 0) {
    Fail(ErrorCode::kConfig, source + ": target column '" + options.target + "' not found");
  }

  enum class Role { kFeature, kTarget, kId, kExcluded };
  std::vector<Role> roles(header.size(), Role::kFeature);
  roles[target_col] = Role::kTarget;
  for (const auto& name : options.id_columns) {
    const int c = column_of(name);
    if (c < 0) Fail(ErrorCode::kConfig, source + ": ID column '" + name + "' not found");
    if (c == target_col) Fail(ErrorCode::kConfig, "column '" + name + "' is both target and ID");
    roles[c] = Role::kId;
  }
  for (const auto& name : options.exclude_columns) {
    const int c = column_of(name);
    if (c < 0) Fail(ErrorCode::kConfig, source + ": excluded column '" + name + "' not found");
    if (c == target_col) Fail(ErrorCode::kConfig, "column '" + name + "' is both target and excluded");
    roles[c] = Role::kExcluded;
  }

  RawTable table;
  table.column_order = header;
  table.target_name = options.target;
  std::vector<int> feature_cols;
  std::vector<int> id_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    switch (roles[c]) {
      case Role::kFeature:
        feature_cols.push_back(static_cast<int>(c));
        table.feature_names.push_back(header[c]);
        break;
      case Role::kId:
        id_cols.push_back(static_cast<int>(c));
        table.id_names.push_back(header[c]);
        break;
      case Role::kExcluded:
        table.excluded_columns.push_back(header[c]);
        break;
      case Role::kTarget:
        break;
    }
  }
  table.features.resize(feature_cols.size());
  table.ids.resize(id_cols.size());

  std::vector<std::string> cells;
  std::vector<double> row_values(header.size(), 0.0);
  size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    ++row;
    if (!SplitRecord(line, cells)) {
      Fail(ErrorCode::kIo, source + ": row " + std::to_string(row) + ": unterminated quote");
    }
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kIo, source + ": row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " fields, header has " +
                               std::to_string(header.size()));
    }
    bool missing = false;
    for (size_t c = 0; c < header.size(); ++c) {
      if (roles[c] != Role::kFeature && roles[c] != Role::kTarget) continue;
      const std::string cell = Trim(cells[c]);
      if (IsMissing(cell)) {
        if (!options.drop_missing_rows) {
          Fail(ErrorCode::kIo, source + ": row " + std::to_string(row) + ", column '" +
                                   header[c] + "': missing value");
        }
        missing = true;
        continue;
      }
      if (!ParseNumber(cell, row_values[c])) {
        Fail(ErrorCode::kIo, source + ": row " + std::to_string(row) + ", column '" + header[c] +
                                 "': non-numeric value '" + cell + "'");
      }
    }
    if (missing) {
      table.dropped_rows.push_back(row);
      continue;
    }
    for (size_t k = 0; k < feature_cols.size(); ++k) table.features[k].push_back(row_values[feature_cols[k]]);
    table.target.push_back(row_values[target_col]);
    for (size_t k = 0; k < id_cols.size(); ++k) table.ids[k].push_back(Trim(cells[id_cols[k]]));
  }
  return table;
}

void WriteCsv(const RawTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  CsvWriter csv(out);
  for (const auto& name : table.id_names) csv.Field(name);
  for (const auto& name : table.feature_names) csv.Field(name);
  csv.Field(table.target_name);
  csv.EndRow();
  for (size_t i = 0; i < table.n_rows(); ++i) {
    for (const auto& column : table.ids) csv.Field(column[i]);
    for (const auto& column : table.features) csv.Number(column[i]);
    csv.Number(table.target[i]);
    csv.EndRow();
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

const ColumnReport* StandardizationReport::Find(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::pair<double, double> SampleMoments(std::span<const double> values) {
  const size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return {mean, sd};
}

Dataset::Dataset(Eigen::MatrixXd values, Eigen::VectorXd target,
                 std::vector<std::string> feature_names)
    : values_(std::move(values)), target_(std::move(target)), feature_names_(std::move(feature_names)) {
  if (values_.rows() < 2) Fail(ErrorCode::kNumeric, "dataset needs at least 2 patterns");
  if (values_.cols() < 1) Fail(ErrorCode::kNumeric, "dataset needs at least 1 feature");
  if (target_.size() != values_.rows()) Fail(ErrorCode::kArgument, "target length does not match rows");
  if (feature_names_.size() != static_cast<size_t>(values_.cols())) {
    Fail(ErrorCode::kArgument, "feature name count does not match columns");
  }
  if (!values_.allFinite() || !target_.allFinite()) Fail(ErrorCode::kNumeric, "non-finite entry in dataset");
  auto check = [&](std::span<const double> v, const std::string& name) {
    const auto [mean, sd] = SampleMoments(v);
    if (std::abs(mean) >= kStandardizedTolerance || std::abs(sd - 1.0) >= kStandardizedTolerance) {
      Fail(ErrorCode::kNumeric, "column '" + name + "' is not standardized");
    }
  };
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    check({values_.col(j).data(), static_cast<size_t>(values_.rows())}, feature_names_[j]);
  }
  check({target_.data(), static_cast<size_t>(target_.size())}, "target");
}

int Dataset::FeatureIndex(const std::string& name) const {
  const auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  return it == feature_names_.end() ? -1 : static_cast<int>(it - feature_names_.begin());
}

std::pair<Dataset, StandardizationReport> Standardize(const RawTable& table) {
  const size_t n = table.n_rows();
  const size_t p = table.n_features();
  if (n < 2) Fail(ErrorCode::kNumeric, "need at least 2 rows, got " + std::to_string(n));
  if (p < 1) Fail(ErrorCode::kNumeric, "need at least 1 feature column");

  StandardizationReport report;
  report.dropped_rows = table.dropped_rows;

  auto zscore = [&](std::span<const double> column, const std::string& name, double* out) {
    const auto [mean, sd] = SampleMoments(column);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      Fail(ErrorCode::kNumeric, "column '" + name + "' has zero variance and cannot be z-scored");
    }
    for (size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - mean) / sd;
    return std::pair{mean, sd};
  };

  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::pair<double, double>> feature_moments(p);
  for (size_t j = 0; j < p; ++j) {
    if (table.features[j].size() != n) Fail(ErrorCode::kArgument, "ragged raw table");
    feature_moments[j] = zscore(table.features[j], table.feature_names[j], values.col(static_cast<Eigen::Index>(j)).data());
  }
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  const auto target_moments = zscore(table.target, table.target_name, target.data());

  // Report entries follow the input column order.
  auto index_in = [](const std::vector<std::string>& names, const std::string& name) {
    return static_cast<size_t>(std::find(names.begin(), names.end(), name) - names.begin());
  };
  std::vector<std::string> order = table.column_order;
  if (order.empty()) {
    order = table.id_names;
    order.insert(order.end(), table.feature_names.begin(), table.feature_names.end());
    order.push_back(table.target_name);
    order.insert(order.end(), table.excluded_columns.begin(), table.excluded_columns.end());
  }
  for (const auto& name : order) {
    ColumnReport entry;
    entry.name = name;
    if (name == table.target_name) {
      entry.role = "target";
      std::tie(entry.mean, entry.sd) = target_moments;
    } else if (size_t j = index_in(table.feature_names, name); j < p) {
      entry.role = "feature";
      std::tie(entry.mean, entry.sd) = feature_moments[j];
    } else if (index_in(table.id_names, name) < table.id_names.size()) {
      entry.role = "id";
      entry.note = "carried through, not modeled";
    } else {
      entry.role = "excluded";
      entry.note = "dropped by configuration";
    }
    report.columns.push_back(std::move(entry));
  }
  return {Dataset(std::move(values), std::move(target), table.feature_names), std::move(report)};
}

}  // namespace hifi
