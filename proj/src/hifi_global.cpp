#include "hifi_global.hpp"

#include <cmath>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace hifi {
namespace {

double Sign(Direction d) { return d == Direction::kMax ? 1.0 : -1.0; }

void CheckFeature(const LocoEvaluator& eval, int j, const char* what) {
  if (j < 0 || static_cast<size_t>(j) >= eval.dataset().n_features()) {
    Fail(ErrorCode::kArgument, std::string(what) + " index out of range");
  }
}

}  // namespace

void SurrogateConfig::Validate() const {
  if (n_surrogates < 20) Fail(ErrorCode::kConfig, "n_surrogates must be at least 20");
  if (!(alpha > 0.0 && alpha < 0.5)) Fail(ErrorCode::kConfig, "alpha must lie in (0, 0.5)");
}

const char* DirectionName(Direction d) { return d == Direction::kMax ? "max" : "min"; }

double SurrogatePValue(LocoEvaluator& eval, int driver, const FeatureSubset& current,
                       int candidate, Direction direction, double observed_gain,
                       const SurrogateConfig& config) {
  config.Validate();
  CheckFeature(eval, driver, "driver");
  CheckFeature(eval, candidate, "candidate");
  if (candidate == driver || current.Contains(candidate) || current.Contains(driver)) {
    Fail(ErrorCode::kArgument, "candidate must lie outside the current subset and the driver");
  }
  const double sign = Sign(direction);
  const double base = eval.Loco(driver, current);
  const FeatureSubset extended = current.With(candidate);
  const uint64_t stream = DeriveSeed(config.seed, {static_cast<uint64_t>(driver),
                                                   static_cast<uint64_t>(direction),
                                                   FeatureSubsetHash{}(current),
                                                   static_cast<uint64_t>(candidate)});
  const auto& source = eval.dataset().column(static_cast<size_t>(candidate));
  const size_t n = eval.dataset().n_patterns();
  std::vector<size_t> order(n);
  Eigen::VectorXd permuted(static_cast<Eigen::Index>(n));
  int at_least_as_extreme = 0;
  for (int s = 0; s < config.n_surrogates; ++s) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(DeriveSeed(stream, {static_cast<uint64_t>(s)}));
    rng.Shuffle(std::span<size_t>(order));
    for (size_t i = 0; i < n; ++i) permuted[static_cast<Eigen::Index>(i)] = source[static_cast<Eigen::Index>(order[i])];
    const double null_gain = sign * (eval.LocoWithColumn(driver, extended, candidate, permuted) - base);
    if (null_gain >= observed_gain) ++at_least_as_extreme;
  }
  return (at_least_as_extreme + 1.0) / (config.n_surrogates + 1.0);
}

double SurrogateTest(LocoEvaluator& eval, int driver, const FeatureSubset& current,
                     int candidate, Direction direction, const SurrogateConfig& config) {
  CheckFeature(eval, candidate, "candidate");
  if (candidate == driver || current.Contains(candidate)) {
    Fail(ErrorCode::kArgument, "candidate must lie outside the current subset and the driver");
  }
  const double observed = Sign(direction) * (eval.Loco(driver, current.With(candidate)) -
                                             eval.Loco(driver, current));
  return SurrogatePValue(eval, driver, current, candidate, direction, observed, config);
}

GreedyPath GreedySearch(LocoEvaluator& eval, int driver, Direction direction,
                        const SurrogateConfig& config) {
  config.Validate();
  CheckFeature(eval, driver, "driver");
  const double sign = Sign(direction);
  const int p = static_cast<int>(eval.dataset().n_features());

  GreedyPath path;
  path.direction = direction;
  FeatureSubset current;
  double current_loco = eval.PairwisePower(driver);
  while (true) {
    int best = -1;
    double best_loco = 0.0;
    for (int c = 0; c < p; ++c) {
      if (c == driver || current.Contains(c)) continue;
      const double l = eval.Loco(driver, current.With(c));
      // Strict comparison keeps the lowest index on ties.
      if (best < 0 || sign * (l - best_loco) > 0.0) {
        best = c;
        best_loco = l;
      }
    }
    if (best < 0) break;
    const double gain = sign * (best_loco - current_loco);
    if (!(gain > kImprovementTolerance)) break;
    const double p_value = SurrogatePValue(eval, driver, current, best, direction, gain, config);
    if (p_value > config.alpha) break;
    path.steps.push_back({best, best_loco, gain, p_value});
    current = current.With(best);
    current_loco = best_loco;
  }
  path.final_subset = current;
  path.final_loco = current_loco;
  return path;
}

FeatureDecomposition DecomposeFeature(LocoEvaluator& eval, int driver, const SurrogateConfig& config) {
  FeatureDecomposition d;
  d.driver = driver;
  d.l_empty = eval.PairwisePower(driver);
  d.min_path = GreedySearch(eval, driver, Direction::kMin, config);
  d.max_path = GreedySearch(eval, driver, Direction::kMax, config);
  d.l_min = d.min_path.final_loco;
  d.l_max = d.max_path.final_loco;
  d.unique = d.l_min;
  d.redundant = d.l_empty - d.l_min;
  d.synergistic = d.l_max - d.l_empty;
  if (d.redundant < 0.0 || d.synergistic < 0.0) {
    Fail(ErrorCode::kNumeric, "negative redundancy or synergy for driver " + std::to_string(driver));
  }
  if (std::abs(d.l_max - (d.synergistic + d.redundant + d.unique)) >= 1e-10) {
    Fail(ErrorCode::kNumeric, "decomposition identity violated for driver " + std::to_string(driver));
  }
  return d;
}

std::vector<FeatureDecomposition> DecomposeAll(LocoEvaluator& eval, const SurrogateConfig& config,
                                               int workers) {
  config.Validate();
  const size_t p = eval.dataset().n_features();
  std::vector<FeatureDecomposition> out(p);
  ParallelFor(p, workers, [&](size_t j) { out[j] = DecomposeFeature(eval, static_cast<int>(j), config); });
  return out;
}

}  // namespace hifi
