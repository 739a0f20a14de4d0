#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"

namespace hifi {

// Sorted, duplicate-free set of feature indices.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(std::vector<int> indices);

  FeatureSubset With(int feature) const;
  bool Contains(int feature) const;
  size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<int>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  // Joins feature names with '+'; "{}" for the empty set.
  std::string ToString(const std::vector<std::string>& names) const;

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;
  // Size first, then lexicographic.
  friend bool operator<(const FeatureSubset& a, const FeatureSubset& b);

 private:
  std::vector<int> indices_;
};

struct FeatureSubsetHash {
  size_t operator()(const FeatureSubset& s) const noexcept;
};

// How the prediction error is estimated.
struct EvalScheme {
  enum class Kind { kInSample, kCrossFit };

  Kind kind = Kind::kInSample;
  int folds = 0;
  uint64_t seed = 0;

  static EvalScheme InSample() { return {}; }
  static EvalScheme CrossFit(int folds, uint64_t seed) { return {Kind::kCrossFit, folds, seed}; }

  bool in_sample() const { return kind == Kind::kInSample; }
  void Validate() const;
  std::string ToString() const;

  friend bool operator==(const EvalScheme&, const EvalScheme&) = default;
};

struct RegressorFit {
  Eigen::VectorXd params;
  int rank = 0;
};

// Fitting backend. Implementations must be deterministic: equal inputs give
// bit-identical parameters.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::string Name() const = 0;
  virtual RegressorFit Fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const = 0;
  virtual Eigen::VectorXd Predict(const Eigen::VectorXd& params, const Eigen::MatrixXd& x) const = 0;
};

// Least squares without intercept; rank-deficient designs get the
// minimum-norm solution.
class LeastSquares final : public Regressor {
 public:
  explicit LeastSquares(double rank_tolerance = 1e-10) : rank_tolerance_(rank_tolerance) {}

  std::string Name() const override { return "least-squares"; }
  RegressorFit Fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const override;
  Eigen::VectorXd Predict(const Eigen::VectorXd& params, const Eigen::MatrixXd& x) const override;

 private:
  double rank_tolerance_;
};

std::shared_ptr<const Regressor> DefaultRegressor();

struct FittedModel {
  FeatureSubset features;  // design columns, driver included where applicable
  // One column of parameters per fold; a single column in-sample.
  Eigen::MatrixXd coefficients;
  int rank = 0;  // smallest rank over folds
  // y - prediction for every pattern; out-of-fold predictions under cross-fit.
  Eigen::VectorXd residuals;
  // Mean squared residual over all patterns.
  double error = 0.0;
};

Eigen::MatrixXd BuildDesign(const Dataset& data, const FeatureSubset& features);

FittedModel FitDesign(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                      FeatureSubset features, const EvalScheme& scheme,
                      const Regressor& regressor);

FittedModel Fit(const Dataset& data, const FeatureSubset& subset, bool include_driver,
                int driver, const EvalScheme& scheme = {},
                const Regressor& regressor = *DefaultRegressor());

// Mean squared residual over `rows`; all rows when not given.
double Mse(const FittedModel& model, std::optional<std::span<const size_t>> rows = std::nullopt);

// Fold index per pattern for k-fold cross-fitting.
std::vector<int> FoldAssignment(size_t n_patterns, int folds, uint64_t seed);

struct CacheKey {
  EvalScheme scheme;
  FeatureSubset features;
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheKeyHash {
  size_t operator()(const CacheKey& k) const noexcept;
};

// Thread-safe store of fitted models, FIFO eviction at `capacity` entries.
// Capacity 0 disables caching.
class ModelCache {
 public:
  explicit ModelCache(size_t capacity = 8192) : capacity_(capacity) {}

  std::shared_ptr<const FittedModel> GetOrFit(const CacheKey& key,
                                              const std::function<FittedModel()>& fit);
  size_t hits() const { return hits_.load(); }
  size_t misses() const { return misses_.load(); }
  size_t size() const;
  size_t capacity() const { return capacity_; }

 private:
  size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<CacheKey, std::shared_ptr<const FittedModel>, CacheKeyHash> entries_;
  std::deque<CacheKey> order_;
  std::atomic<size_t> hits_{0};
  std::atomic<size_t> misses_{0};
};

// Fits and caches models over one dataset and evaluates LOCO terms. The
// dataset must outlive the evaluator.
class LocoEvaluator {
 public:
  explicit LocoEvaluator(const Dataset& data, EvalScheme scheme = {},
                         std::shared_ptr<const Regressor> regressor = DefaultRegressor(),
                         size_t cache_capacity = 8192);

  const Dataset& dataset() const { return data_; }
  const EvalScheme& scheme() const { return scheme_; }
  const ModelCache& cache() const { return cache_; }

  std::shared_ptr<const FittedModel> Model(const FeatureSubset& features);
  // Prediction error of y given `features`.
  double Error(const FeatureSubset& features);
  // L_subset(driver -> y) = error(subset) - error(subset + driver).
  double Loco(int driver, const FeatureSubset& subset);
  // L_empty(driver -> y) = sigma^2_y - error(driver).
  double PairwisePower(int driver);

  // LOCO with column `replaced` (a member of `subset`) swapped for `column`.
  // Never cached.
  double LocoWithColumn(int driver, const FeatureSubset& subset, int replaced,
                        const Eigen::VectorXd& column) const;

 private:
  double ErrorWithColumn(const FeatureSubset& features, int replaced,
                         const Eigen::VectorXd& column) const;
  void CheckDriver(int driver, const FeatureSubset& subset) const;

  const Dataset& data_;
  EvalScheme scheme_;
  std::shared_ptr<const Regressor> regressor_;
  ModelCache cache_;
};

double Loco(const Dataset& data, int driver, const FeatureSubset& subset,
            const EvalScheme& scheme = {});
double PairwisePower(const Dataset& data, int driver, const EvalScheme& scheme = {});

}  // namespace hifi
