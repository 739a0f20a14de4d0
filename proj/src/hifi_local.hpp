#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hifi_global.hpp"

namespace hifi {

// Per-pattern LOCO: squared residual without the driver minus squared
// residual with it, both from models fitted on the whole dataset (or the
// out-of-fold models under cross-fitting). May be negative.
double LocalLoco(LocoEvaluator& eval, int driver, const FeatureSubset& subset, size_t pattern);
Eigen::VectorXd LocalLocoColumn(LocoEvaluator& eval, int driver, const FeatureSubset& subset);

struct LocalTriple {
  double unique = 0.0;
  double redundant = 0.0;
  double synergistic = 0.0;
};

LocalTriple LocalScores(LocoEvaluator& eval, const FeatureDecomposition& decomposition, size_t pattern);

enum class ScoreKind { kLocalLocoMax, kUnique, kRedundant, kSynergistic, kShapley };

// Short name used in file names: loco, u, r, s, shapley.
std::string_view ScoreKindName(ScoreKind kind);

struct LocalScoreMatrix {
  ScoreKind kind = ScoreKind::kLocalLocoMax;
  Eigen::MatrixXd values;  // N x p
  std::vector<std::string> feature_names;

  Eigen::VectorXd ColumnMeans() const;
};

struct LocalHifiScores {
  LocalScoreMatrix loco_max;
  LocalScoreMatrix unique;
  LocalScoreMatrix redundant;
  LocalScoreMatrix synergistic;
};

// `decompositions` must hold one entry per feature, in driver order.
LocalHifiScores ComputeLocalScores(LocoEvaluator& eval,
                                   std::span<const FeatureDecomposition> decompositions,
                                   int workers = 1);

// Pattern classes for conditional histograms.
struct ClassLabels {
  std::vector<int> label;  // per pattern, index into names
  std::vector<std::string> names;
};

// Three balanced groups by rank of the raw target: Low, Medium, High. Ties
// are broken by pattern index.
ClassLabels TertileClasses(std::span<const double> raw_target);
// One class per distinct value, in order of first appearance.
ClassLabels ClassesFromColumn(std::span<const std::string> values);

struct ClassHistogram {
  std::string name;
  std::vector<size_t> counts;
  size_t n = 0;
  double mean = 0.0;  // mean driver value over retained members; NaN if none
};

struct ThresholdLevel {
  double discard_percent = 0.0;
  std::vector<size_t> retained;  // ascending pattern indices
  double pearson = 0.0;          // driver vs target over retained patterns
  std::vector<ClassHistogram> classes;
};

struct ThresholdAnalysis {
  int driver = -1;
  std::vector<double> bin_edges;
  std::vector<ThresholdLevel> levels;
};

double PearsonCorrelation(std::span<const double> a, std::span<const double> b);

// For each discard percentage d, keeps the N - floor(N d / 100) patterns with
// the highest local U (ties to the lower index) and reports the driver/target
// correlation and per-class histograms of the driver over them.
ThresholdAnalysis UThresholdAnalysis(const Dataset& data, int driver,
                                     std::span<const double> local_unique,
                                     std::span<const double> discard_percents,
                                     const std::optional<ClassLabels>& classes, int bins = 30);

}  // namespace hifi
