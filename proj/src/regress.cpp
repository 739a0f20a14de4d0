#include "regress.hpp"

#include <algorithm>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace hifi {

FeatureSubset::FeatureSubset(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    Fail(ErrorCode::kArgument, "feature subset has duplicate indices");
  }
  if (!indices_.empty() && indices_.front() < 0) Fail(ErrorCode::kArgument, "negative feature index");
}

FeatureSubset FeatureSubset::With(int feature) const {
  if (feature < 0) Fail(ErrorCode::kArgument, "negative feature index");
  if (Contains(feature)) Fail(ErrorCode::kArgument, "feature already in subset");
  FeatureSubset out = *this;
  out.indices_.insert(std::upper_bound(out.indices_.begin(), out.indices_.end(), feature), feature);
  return out;
}

bool FeatureSubset::Contains(int feature) const {
  return std::binary_search(indices_.begin(), indices_.end(), feature);
}

std::string FeatureSubset::ToString(const std::vector<std::string>& names) const {
  if (indices_.empty()) return "{}";
  std::string out;
  for (int j : indices_) {
    if (!out.empty()) out += '+';
    out += (static_cast<size_t>(j) < names.size()) ? names[j] : std::to_string(j);
  }
  return out;
}

bool operator<(const FeatureSubset& a, const FeatureSubset& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.indices_ < b.indices_;
}

size_t FeatureSubsetHash::operator()(const FeatureSubset& s) const noexcept {
  uint64_t h = 0x51ed2701u + s.size();
  for (int j : s) h = SplitMix64(h ^ static_cast<uint64_t>(j));
  return static_cast<size_t>(h);
}

void EvalScheme::Validate() const {
  if (kind == Kind::kCrossFit && folds < 2) {
    Fail(ErrorCode::kConfig, "cross-fit scheme needs at least 2 folds");
  }
}

std::string EvalScheme::ToString() const {
  if (in_sample()) return "in-sample";
  return "cross-fit(k=" + std::to_string(folds) + ",seed=" + std::to_string(seed) + ")";
}

RegressorFit LeastSquares::Fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
  RegressorFit out;
  if (x.cols() == 0) {
    out.params = Eigen::VectorXd(0);
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(rank_tolerance_);
  cod.compute(x);
  out.params = cod.solve(y);
  out.rank = static_cast<int>(cod.rank());
  if (!out.params.allFinite()) Fail(ErrorCode::kNumeric, "least-squares solution is not finite");
  return out;
}

Eigen::VectorXd LeastSquares::Predict(const Eigen::VectorXd& params, const Eigen::MatrixXd& x) const {
  if (x.cols() == 0) return Eigen::VectorXd::Zero(x.rows());
  return x * params;
}

std::shared_ptr<const Regressor> DefaultRegressor() {
  static const auto instance = std::make_shared<const LeastSquares>();
  return instance;
}

Eigen::MatrixXd BuildDesign(const Dataset& data, const FeatureSubset& features) {
  Eigen::MatrixXd design(data.values().rows(), static_cast<Eigen::Index>(features.size()));
  Eigen::Index c = 0;
  for (int j : features) {
    if (static_cast<size_t>(j) >= data.n_features()) Fail(ErrorCode::kArgument, "feature index out of range");
    design.col(c++) = data.column(static_cast<size_t>(j));
  }
  return design;
}

std::vector<int> FoldAssignment(size_t n_patterns, int folds, uint64_t seed) {
  std::vector<size_t> order(n_patterns);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(DeriveSeed(seed, {0xf01d}));
  rng.Shuffle(std::span<size_t>(order));
  std::vector<int> fold(n_patterns);
  for (size_t k = 0; k < n_patterns; ++k) fold[order[k]] = static_cast<int>(k % static_cast<size_t>(folds));
  return fold;
}

FittedModel FitDesign(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                      FeatureSubset features, const EvalScheme& scheme,
                      const Regressor& regressor) {
  scheme.Validate();
  FittedModel model;
  model.features = std::move(features);
  const Eigen::Index n = design.rows();
  if (scheme.in_sample()) {
    RegressorFit fit = regressor.Fit(design, target);
    model.rank = fit.rank;
    model.residuals = target - regressor.Predict(fit.params, design);
    model.coefficients = std::move(fit.params);
  } else {
    if (static_cast<Eigen::Index>(scheme.folds) > n) Fail(ErrorCode::kConfig, "more folds than patterns");
    const std::vector<int> fold = FoldAssignment(static_cast<size_t>(n), scheme.folds, scheme.seed);
    model.coefficients.resize(design.cols(), scheme.folds);
    model.residuals.resize(n);
    model.rank = static_cast<int>(design.cols());
    for (int f = 0; f < scheme.folds; ++f) {
      std::vector<Eigen::Index> train, test;
      for (Eigen::Index i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
      const Eigen::MatrixXd x_train = design(train, Eigen::all);
      const Eigen::VectorXd y_train = target(train);
      RegressorFit fit = regressor.Fit(x_train, y_train);
      model.rank = std::min(model.rank, fit.rank);
      const Eigen::MatrixXd x_test = design(test, Eigen::all);
      const Eigen::VectorXd prediction = regressor.Predict(fit.params, x_test);
      for (size_t k = 0; k < test.size(); ++k) model.residuals[test[k]] = target[test[k]] - prediction[static_cast<Eigen::Index>(k)];
      model.coefficients.col(f) = fit.params;
    }
  }
  if (!model.residuals.allFinite()) Fail(ErrorCode::kNumeric, "non-finite residuals");
  model.error = model.residuals.squaredNorm() / static_cast<double>(n);
  return model;
}

FittedModel Fit(const Dataset& data, const FeatureSubset& subset, bool include_driver,
                int driver, const EvalScheme& scheme, const Regressor& regressor) {
  if (subset.Contains(driver)) Fail(ErrorCode::kArgument, "subset contains the driver");
  const FeatureSubset features = include_driver ? subset.With(driver) : subset;
  return FitDesign(BuildDesign(data, features), data.target(), features, scheme, regressor);
}

double Mse(const FittedModel& model, std::optional<std::span<const size_t>> rows) {
  if (!rows) return model.error;
  if (rows->empty()) Fail(ErrorCode::kArgument, "mse over an empty row set");
  double sum = 0.0;
  for (size_t i : *rows) {
    if (i >= static_cast<size_t>(model.residuals.size())) Fail(ErrorCode::kArgument, "row index out of range");
    sum += model.residuals[static_cast<Eigen::Index>(i)] * model.residuals[static_cast<Eigen::Index>(i)];
  }
  return sum / static_cast<double>(rows->size());
}

size_t CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  uint64_t h = FeatureSubsetHash{}(k.features);
  h = SplitMix64(h ^ (static_cast<uint64_t>(k.scheme.kind) << 32) ^ static_cast<uint64_t>(k.scheme.folds));
  return static_cast<size_t>(SplitMix64(h ^ k.scheme.seed));
}

std::shared_ptr<const FittedModel> ModelCache::GetOrFit(const CacheKey& key,
                                                        const std::function<FittedModel()>& fit) {
  if (capacity_ > 0) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  auto model = std::make_shared<const FittedModel>(fit());
  if (capacity_ == 0) return model;
  std::lock_guard<std::mutex> lock(mutex_);
  // Another thread may have inserted the same fit; both are bit-identical.
  auto [it, inserted] = entries_.emplace(key, model);
  if (inserted) {
    order_.push_back(key);
    while (entries_.size() > capacity_) {
      entries_.erase(order_.front());
      order_.pop_front();
    }
  }
  return it->second;
}

size_t ModelCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

LocoEvaluator::LocoEvaluator(const Dataset& data, EvalScheme scheme,
                             std::shared_ptr<const Regressor> regressor, size_t cache_capacity)
    : data_(data), scheme_(scheme), regressor_(std::move(regressor)), cache_(cache_capacity) {
  scheme_.Validate();
  if (!regressor_) Fail(ErrorCode::kArgument, "null regressor");
}

std::shared_ptr<const FittedModel> LocoEvaluator::Model(const FeatureSubset& features) {
  return cache_.GetOrFit({scheme_, features}, [&] {
    return FitDesign(BuildDesign(data_, features), data_.target(), features, scheme_, *regressor_);
  });
}

double LocoEvaluator::Error(const FeatureSubset& features) { return Model(features)->error; }

void LocoEvaluator::CheckDriver(int driver, const FeatureSubset& subset) const {
  if (driver < 0 || static_cast<size_t>(driver) >= data_.n_features()) {
    Fail(ErrorCode::kArgument, "driver index out of range");
  }
  if (subset.Contains(driver)) Fail(ErrorCode::kArgument, "conditioning subset contains the driver");
}

double LocoEvaluator::Loco(int driver, const FeatureSubset& subset) {
  CheckDriver(driver, subset);
  return Error(subset) - Error(subset.With(driver));
}

double LocoEvaluator::PairwisePower(int driver) { return Loco(driver, FeatureSubset{}); }

double LocoEvaluator::ErrorWithColumn(const FeatureSubset& features, int replaced,
                                      const Eigen::VectorXd& column) const {
  Eigen::MatrixXd design = BuildDesign(data_, features);
  const auto& idx = features.indices();
  const auto pos = std::find(idx.begin(), idx.end(), replaced) - idx.begin();
  design.col(pos) = column;
  return FitDesign(design, data_.target(), features, scheme_, *regressor_).error;
}

double LocoEvaluator::LocoWithColumn(int driver, const FeatureSubset& subset, int replaced,
                                     const Eigen::VectorXd& column) const {
  CheckDriver(driver, subset);
  if (!subset.Contains(replaced)) Fail(ErrorCode::kArgument, "replaced column not in subset");
  if (column.size() != data_.values().rows()) Fail(ErrorCode::kArgument, "column length mismatch");
  return ErrorWithColumn(subset, replaced, column) - ErrorWithColumn(subset.With(driver), replaced, column);
}

double Loco(const Dataset& data, int driver, const FeatureSubset& subset, const EvalScheme& scheme) {
  LocoEvaluator eval(data, scheme, DefaultRegressor(), 0);
  return eval.Loco(driver, subset);
}

double PairwisePower(const Dataset& data, int driver, const EvalScheme& scheme) {
  return Loco(data, driver, FeatureSubset{}, scheme);
}

}  // namespace hifi
