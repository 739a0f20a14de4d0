#include "shapley.hpp"

#include <cmath>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace hifi {
namespace {

constexpr int kPermutationsPerChunk = 64;

void CheckDriver(const LocoEvaluator& eval, int driver) {
  if (driver < 0 || static_cast<size_t>(driver) >= eval.dataset().n_features()) {
    Fail(ErrorCode::kArgument, "driver index out of range");
  }
}

double Binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

std::vector<int> Permutation(size_t p, uint64_t seed, int k) {
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, {static_cast<uint64_t>(k)}));
  rng.Shuffle(std::span<int>(order));
  return order;
}

struct Summary {
  double mean = 0.0;
  double standard_error = 0.0;
};

Summary Summarize(const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

void CheckPermutations(int n_permutations) {
  if (n_permutations < 100) Fail(ErrorCode::kConfig, "n_permutations must be at least 100");
}

}  // namespace

const char* ShapleyMethodName(ShapleyMethod m) {
  return m == ShapleyMethod::kExact ? "exact" : "monte-carlo";
}

double ShapleyWeight(int n, int k) {
  if (n < 0 || k < 0 || k > n) Fail(ErrorCode::kArgument, "invalid Shapley weight arguments");
  return 1.0 / ((n + 1.0) * Binomial(n, k));
}

bool ShapleyWeightsSumToOneExact(int n) {
  if (n < 0 || n > 31) Fail(ErrorCode::kArgument, "exact weight check supports 0 <= n <= 31");
  using u128 = unsigned __int128;
  std::vector<u128> factorial(static_cast<size_t>(n) + 2, 1);
  for (size_t i = 1; i < factorial.size(); ++i) factorial[i] = factorial[i - 1] * i;
  u128 total = 0;
  for (int k = 0; k <= n; ++k) {
    const u128 choose = factorial[n] / (factorial[k] * factorial[n - k]);
    total += choose * factorial[k] * factorial[n - k];
  }
  return total == factorial[static_cast<size_t>(n) + 1];
}

void ValidateShapleyWeights(int n) {
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) sum += Binomial(n, k) * ShapleyWeight(n, k);
  if (std::abs(sum - 1.0) > 1e-12) Fail(ErrorCode::kNumeric, "Shapley weights do not sum to one");
}

namespace {

// Enumerates every subset of the non-driver features and accumulates the
// weighted LOCO, plus the weighted local LOCO column when requested.
void ExactForDriver(LocoEvaluator& eval, int driver, int max_features, double& value,
                    Eigen::VectorXd* local) {
  const int p = static_cast<int>(eval.dataset().n_features());
  if (p > max_features) {
    Fail(ErrorCode::kArgument, "exact Shapley enumeration bound exceeded: p=" + std::to_string(p) +
                                   " > " + std::to_string(max_features));
  }
  const int n = p - 1;
  ValidateShapleyWeights(n);
  std::vector<int> others;
  for (int j = 0; j < p; ++j) {
    if (j != driver) others.push_back(j);
  }
  value = 0.0;
  if (local) local->setZero(static_cast<Eigen::Index>(eval.dataset().n_patterns()));
  const uint64_t count = uint64_t{1} << n;
  for (uint64_t mask = 0; mask < count; ++mask) {
    std::vector<int> members;
    for (int b = 0; b < n; ++b) {
      if (mask >> b & 1) members.push_back(others[b]);
    }
    const FeatureSubset z(std::move(members));
    const double w = ShapleyWeight(n, static_cast<int>(z.size()));
    const auto without = eval.Model(z);
    const auto with = eval.Model(z.With(driver));
    value += w * (without->error - with->error);
    if (local) *local += w * (without->residuals.array().square() - with->residuals.array().square()).matrix();
  }
}

}  // namespace

ShapleyEstimate ExactShapley(LocoEvaluator& eval, int driver, int max_features) {
  CheckDriver(eval, driver);
  ShapleyEstimate e;
  e.driver = driver;
  e.method = ShapleyMethod::kExact;
  ExactForDriver(eval, driver, max_features, e.value, nullptr);
  return e;
}

ShapleyResult ExactShapleyAll(LocoEvaluator& eval, bool with_local, int workers, int max_features) {
  const size_t p = eval.dataset().n_features();
  ShapleyResult out;
  out.global.resize(p);
  if (with_local) out.local.resize(static_cast<Eigen::Index>(eval.dataset().n_patterns()), static_cast<Eigen::Index>(p));
  ParallelFor(p, workers, [&](size_t j) {
    auto& e = out.global[j];
    e.driver = static_cast<int>(j);
    e.method = ShapleyMethod::kExact;
    Eigen::VectorXd local;
    ExactForDriver(eval, e.driver, max_features, e.value, with_local ? &local : nullptr);
    if (with_local) out.local.col(static_cast<Eigen::Index>(j)) = local;
  });
  return out;
}

ShapleyEstimate MonteCarloShapley(LocoEvaluator& eval, int driver, int n_permutations, uint64_t seed) {
  CheckDriver(eval, driver);
  CheckPermutations(n_permutations);
  const size_t p = eval.dataset().n_features();
  std::vector<double> marginal(static_cast<size_t>(n_permutations));
  for (int k = 0; k < n_permutations; ++k) {
    const std::vector<int> order = Permutation(p, seed, k);
    std::vector<int> before;
    for (int j : order) {
      if (j == driver) break;
      before.push_back(j);
    }
    marginal[k] = eval.Loco(driver, FeatureSubset(std::move(before)));
  }
  const Summary s = Summarize(marginal);
  return {driver, s.mean, ShapleyMethod::kMonteCarlo, n_permutations, s.standard_error};
}

ShapleyResult MonteCarloShapleyAll(LocoEvaluator& eval, int n_permutations, uint64_t seed,
                                   bool with_local, int workers) {
  CheckPermutations(n_permutations);
  const size_t p = eval.dataset().n_features();
  const auto n = static_cast<Eigen::Index>(eval.dataset().n_patterns());
  // marginal[j][k]: contribution of driver j under permutation k.
  std::vector<std::vector<double>> marginal(p, std::vector<double>(static_cast<size_t>(n_permutations)));

  // Chunks are fixed-size and summed in chunk order, so the local sums do not
  // depend on the worker count.
  const size_t chunks = (static_cast<size_t>(n_permutations) + kPermutationsPerChunk - 1) / kPermutationsPerChunk;
  std::vector<Eigen::MatrixXd> chunk_local(with_local ? chunks : 0);
  ParallelFor(chunks, workers, [&](size_t c) {
    Eigen::MatrixXd* acc = nullptr;
    if (with_local) {
      chunk_local[c].setZero(n, static_cast<Eigen::Index>(p));
      acc = &chunk_local[c];
    }
    const int first = static_cast<int>(c) * kPermutationsPerChunk;
    const int last = std::min(n_permutations, first + kPermutationsPerChunk);
    for (int k = first; k < last; ++k) {
      const std::vector<int> order = Permutation(p, seed, k);
      FeatureSubset prefix;
      auto prev = eval.Model(prefix);
      for (int j : order) {
        FeatureSubset next = prefix.With(j);
        auto cur = eval.Model(next);
        marginal[static_cast<size_t>(j)][static_cast<size_t>(k)] = prev->error - cur->error;
        if (acc) acc->col(j) += (prev->residuals.array().square() - cur->residuals.array().square()).matrix();
        prefix = std::move(next);
        prev = std::move(cur);
      }
    }
  });

  ShapleyResult out;
  out.global.resize(p);
  for (size_t j = 0; j < p; ++j) {
    const Summary s = Summarize(marginal[j]);
    out.global[j] = {static_cast<int>(j), s.mean, ShapleyMethod::kMonteCarlo, n_permutations, s.standard_error};
  }
  if (with_local) {
    out.local.setZero(n, static_cast<Eigen::Index>(p));
    for (const auto& m : chunk_local) out.local += m;
    out.local /= static_cast<double>(n_permutations);
  }
  return out;
}

double LocalShapley(LocoEvaluator& eval, int driver, size_t pattern, ShapleyMethod method,
                    int n_permutations, uint64_t seed) {
  CheckDriver(eval, driver);
  const size_t n = eval.dataset().n_patterns();
  if (pattern >= n) Fail(ErrorCode::kArgument, "pattern index out of range");
  const auto i = static_cast<Eigen::Index>(pattern);
  if (method == ShapleyMethod::kExact) {
    double value = 0.0;
    Eigen::VectorXd local;
    ExactForDriver(eval, driver, kDefaultMaxExactFeatures, value, &local);
    return local[i];
  }
  CheckPermutations(n_permutations);
  const size_t p = eval.dataset().n_features();
  double sum = 0.0;
  for (int k = 0; k < n_permutations; ++k) {
    const std::vector<int> order = Permutation(p, seed, k);
    std::vector<int> before;
    for (int j : order) {
      if (j == driver) break;
      before.push_back(j);
    }
    const FeatureSubset z(std::move(before));
    const auto without = eval.Model(z);
    const auto with = eval.Model(z.With(driver));
    sum += without->residuals[i] * without->residuals[i] - with->residuals[i] * with->residuals[i];
  }
  return sum / n_permutations;
}

}  // namespace hifi
