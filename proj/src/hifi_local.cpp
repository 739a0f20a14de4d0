#include "hifi_local.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"

namespace hifi {

Eigen::VectorXd LocalLocoColumn(LocoEvaluator& eval, int driver, const FeatureSubset& subset) {
  const auto without = eval.Model(subset);
  const auto with = eval.Model(subset.With(driver));
  return without->residuals.array().square() - with->residuals.array().square();
}

double LocalLoco(LocoEvaluator& eval, int driver, const FeatureSubset& subset, size_t pattern) {
  if (pattern >= eval.dataset().n_patterns()) Fail(ErrorCode::kArgument, "pattern index out of range");
  const auto without = eval.Model(subset);
  const auto with = eval.Model(subset.With(driver));
  const auto i = static_cast<Eigen::Index>(pattern);
  return without->residuals[i] * without->residuals[i] - with->residuals[i] * with->residuals[i];
}

LocalTriple LocalScores(LocoEvaluator& eval, const FeatureDecomposition& d, size_t pattern) {
  const double at_empty = LocalLoco(eval, d.driver, FeatureSubset{}, pattern);
  const double at_min = LocalLoco(eval, d.driver, d.min_path.final_subset, pattern);
  const double at_max = LocalLoco(eval, d.driver, d.max_path.final_subset, pattern);
  return {at_min, at_empty - at_min, at_max - at_empty};
}

std::string_view ScoreKindName(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kLocalLocoMax: return "loco";
    case ScoreKind::kUnique: return "u";
    case ScoreKind::kRedundant: return "r";
    case ScoreKind::kSynergistic: return "s";
    case ScoreKind::kShapley: return "shapley";
  }
  return "?";
}

Eigen::VectorXd LocalScoreMatrix::ColumnMeans() const {
  return values.colwise().mean().transpose();
}

LocalHifiScores ComputeLocalScores(LocoEvaluator& eval,
                                   std::span<const FeatureDecomposition> decompositions,
                                   int workers) {
  const auto& data = eval.dataset();
  const auto n = static_cast<Eigen::Index>(data.n_patterns());
  const auto p = static_cast<Eigen::Index>(data.n_features());
  if (decompositions.size() != data.n_features()) {
    Fail(ErrorCode::kArgument, "need one decomposition per feature");
  }
  LocalHifiScores out;
  auto init = [&](LocalScoreMatrix& m, ScoreKind kind) {
    m.kind = kind;
    m.values.resize(n, p);
    m.feature_names = data.feature_names();
  };
  init(out.loco_max, ScoreKind::kLocalLocoMax);
  init(out.unique, ScoreKind::kUnique);
  init(out.redundant, ScoreKind::kRedundant);
  init(out.synergistic, ScoreKind::kSynergistic);

  ParallelFor(static_cast<size_t>(p), workers, [&](size_t j) {
    const auto& d = decompositions[j];
    if (d.driver != static_cast<int>(j)) Fail(ErrorCode::kArgument, "decompositions out of driver order");
    const Eigen::VectorXd at_empty = LocalLocoColumn(eval, d.driver, FeatureSubset{});
    const Eigen::VectorXd at_min = LocalLocoColumn(eval, d.driver, d.min_path.final_subset);
    const Eigen::VectorXd at_max = LocalLocoColumn(eval, d.driver, d.max_path.final_subset);
    const auto c = static_cast<Eigen::Index>(j);
    out.loco_max.values.col(c) = at_max;
    out.unique.values.col(c) = at_min;
    out.redundant.values.col(c) = at_empty - at_min;
    out.synergistic.values.col(c) = at_max - at_empty;
  });
  return out;
}

ClassLabels TertileClasses(std::span<const double> raw_target) {
  const size_t n = raw_target.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return raw_target[a] < raw_target[b]; });
  ClassLabels out;
  out.names = {"Low", "Medium", "High"};
  out.label.assign(n, 0);
  for (size_t rank = 0; rank < n; ++rank) out.label[order[rank]] = static_cast<int>((3 * rank) / n);
  return out;
}

ClassLabels ClassesFromColumn(std::span<const std::string> values) {
  ClassLabels out;
  out.label.reserve(values.size());
  for (const auto& v : values) {
    auto it = std::find(out.names.begin(), out.names.end(), v);
    if (it == out.names.end()) {
      out.names.push_back(v);
      it = out.names.end() - 1;
    }
    out.label.push_back(static_cast<int>(it - out.names.begin()));
  }
  return out;
}

double PearsonCorrelation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) Fail(ErrorCode::kArgument, "correlation of unequal lengths");
  const size_t n = a.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

ThresholdAnalysis UThresholdAnalysis(const Dataset& data, int driver,
                                     std::span<const double> local_unique,
                                     std::span<const double> discard_percents,
                                     const std::optional<ClassLabels>& classes, int bins) {
  const size_t n = data.n_patterns();
  if (driver < 0 || static_cast<size_t>(driver) >= data.n_features()) {
    Fail(ErrorCode::kArgument, "driver index out of range");
  }
  if (local_unique.size() != n) Fail(ErrorCode::kArgument, "local U length does not match patterns");
  if (classes && classes->label.size() != n) Fail(ErrorCode::kArgument, "class labels length mismatch");
  if (bins < 1) Fail(ErrorCode::kArgument, "need at least one histogram bin");

  const auto x = data.column(static_cast<size_t>(driver));
  const auto& y = data.target();

  ThresholdAnalysis out;
  out.driver = driver;
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  out.bin_edges.resize(static_cast<size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) out.bin_edges[b] = lo + (hi - lo) * b / bins;
  out.bin_edges.back() = hi;

  std::vector<size_t> by_u(n);
  std::iota(by_u.begin(), by_u.end(), size_t{0});
  std::stable_sort(by_u.begin(), by_u.end(),
                   [&](size_t a, size_t b) { return local_unique[a] > local_unique[b]; });

  for (double d : discard_percents) {
    if (!(d >= 0.0 && d < 100.0)) Fail(ErrorCode::kArgument, "discard percent must lie in [0, 100)");
    const auto n_discard = static_cast<size_t>(std::floor(static_cast<double>(n) * d / 100.0));
    const size_t n_keep = n - n_discard;
    if (n_keep == 0) Fail(ErrorCode::kArgument, "threshold leaves no patterns");
    ThresholdLevel level;
    level.discard_percent = d;
    level.retained.assign(by_u.begin(), by_u.begin() + static_cast<std::ptrdiff_t>(n_keep));
    std::sort(level.retained.begin(), level.retained.end());

    std::vector<double> xs, ys;
    xs.reserve(n_keep);
    ys.reserve(n_keep);
    for (size_t i : level.retained) {
      xs.push_back(x[static_cast<Eigen::Index>(i)]);
      ys.push_back(y[static_cast<Eigen::Index>(i)]);
    }
    level.pearson = PearsonCorrelation(xs, ys);

    if (classes) {
      level.classes.resize(classes->names.size());
      for (size_t c = 0; c < classes->names.size(); ++c) {
        level.classes[c].name = classes->names[c];
        level.classes[c].counts.assign(static_cast<size_t>(bins), 0);
        level.classes[c].mean = 0.0;
      }
      for (size_t i : level.retained) {
        auto& h = level.classes[static_cast<size_t>(classes->label[i])];
        const double v = x[static_cast<Eigen::Index>(i)];
        size_t b = hi > lo ? static_cast<size_t>((v - lo) / (hi - lo) * bins) : 0;
        b = std::min(b, static_cast<size_t>(bins) - 1);
        ++h.counts[b];
        ++h.n;
        h.mean += v;
      }
      for (auto& h : level.classes) {
        h.mean = h.n > 0 ? h.mean / static_cast<double>(h.n) : std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.levels.push_back(std::move(level));
  }
  return out;
}

}  // namespace hifi
