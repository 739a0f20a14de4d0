#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "hifi_global.hpp"
#include "hifi_local.hpp"
#include "oracle_synth.hpp"
#include "regress.hpp"
#include "run_config.hpp"
#include "shapley.hpp"

namespace hifi {

inline constexpr const char* kEngineVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;
// Exact Shapley enumeration is used up to this many features under "auto".
inline constexpr int kAutoExactShapleyMaxFeatures = 12;

// Loaded, standardized data plus lazily computed results, all drawn from one
// shared model cache.
class Analysis {
 public:
  explicit Analysis(RunConfig config);

  const RunConfig& config() const { return config_; }
  const RawTable& raw() const { return raw_; }
  const Dataset& dataset() const { return *data_; }
  const StandardizationReport& standardization() const { return report_; }
  LocoEvaluator& evaluator() { return *eval_; }

  // Throws a config error for unknown names.
  int DriverIndex(const std::string& feature) const;

  const std::vector<FeatureDecomposition>& Decompositions();
  ShapleyMethod shapley_method() const;
  uint64_t shapley_seed() const;
  const ShapleyResult& Shapley(bool with_local);
  LocalHifiScores LocalScores();

 private:
  RunConfig config_;
  RawTable raw_;
  StandardizationReport report_;
  std::unique_ptr<Dataset> data_;
  std::unique_ptr<LocoEvaluator> eval_;
  std::optional<std::vector<FeatureDecomposition>> decompositions_;
  std::optional<ShapleyResult> shapley_;
  bool shapley_has_local_ = false;
};

// analyze: report.json, global_scores.csv, path_redundant.csv,
// path_synergistic.csv.
void RunAnalyze(const RunConfig& config);
// local: everything analyze writes plus local_{loco,u,r,s,shapley}.csv,
// local_order.csv and, with a group column, group_means_<kind>.csv.
void RunLocal(const RunConfig& config);
// uthresh: uthresh_<feature>.csv plus one histogram file per discard level.
void RunThreshold(const RunConfig& config, const std::string& feature);

struct OracleSummary {
  size_t drivers = 0;
  size_t matches = 0;
};
// oracle: oracle.csv comparing greedy and exhaustive extremes per driver.
OracleSummary RunOracle(const RunConfig& config);

// File-name-safe version of a feature name.
std::string SanitizeName(const std::string& name);

}  // namespace hifi
