#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regress.hpp"

namespace hifi {

// Permutation surrogate test parameters for the greedy stopping rule.
struct SurrogateConfig {
  int n_surrogates = 100;
  double alpha = 0.05;
  uint64_t seed = 0;

  void Validate() const;
};

enum class Direction { kMin, kMax };

const char* DirectionName(Direction d);

struct PathStep {
  int feature = -1;
  double loco = 0.0;     // L after adding `feature`
  double gain = 0.0;     // improvement over the previous step, > 0
  double p_value = 1.0;
};

struct GreedyPath {
  Direction direction = Direction::kMin;
  std::vector<PathStep> steps;
  FeatureSubset final_subset;
  double final_loco = 0.0;
};

struct FeatureDecomposition {
  int driver = -1;
  double l_empty = 0.0;
  double l_min = 0.0;
  double l_max = 0.0;
  double unique = 0.0;       // L_min
  double redundant = 0.0;    // L_empty - L_min
  double synergistic = 0.0;  // L_max - L_empty
  GreedyPath min_path;
  GreedyPath max_path;
};

// Improvements at or below this are treated as zero.
inline constexpr double kImprovementTolerance = 1e-12;

// One-sided permutation p-value, (r + 1) / (n + 1), of the step that adds
// `candidate` to `current`. The null recomputes the step with the candidate
// column row-permuted and all models refit.
double SurrogateTest(LocoEvaluator& eval, int driver, const FeatureSubset& current,
                     int candidate, Direction direction, const SurrogateConfig& config);

// Same, with the observed improvement already known.
double SurrogatePValue(LocoEvaluator& eval, int driver, const FeatureSubset& current,
                       int candidate, Direction direction, double observed_gain,
                       const SurrogateConfig& config);

GreedyPath GreedySearch(LocoEvaluator& eval, int driver, Direction direction,
                        const SurrogateConfig& config);

FeatureDecomposition DecomposeFeature(LocoEvaluator& eval, int driver,
                                      const SurrogateConfig& config);

// Every feature as driver. Output order is by driver index and does not
// depend on `workers`.
std::vector<FeatureDecomposition> DecomposeAll(LocoEvaluator& eval, const SurrogateConfig& config,
                                               int workers = 1);

}  // namespace hifi
