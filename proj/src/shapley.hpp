#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "regress.hpp"

namespace hifi {

enum class ShapleyMethod { kExact, kMonteCarlo };

const char* ShapleyMethodName(ShapleyMethod m);

struct ShapleyEstimate {
  int driver = -1;
  double value = 0.0;
  ShapleyMethod method = ShapleyMethod::kExact;
  int n_permutations = 0;       // Monte-Carlo only
  double standard_error = 0.0;  // Monte-Carlo only
};

inline constexpr int kDefaultMaxExactFeatures = 20;

// |z|! (n - |z|)! / (n + 1)! for a conditioning set of size k among n others.
double ShapleyWeight(int n, int k);

// Sum over k of C(n, k) k! (n - k)! equals (n + 1)!, checked in 128-bit
// integer arithmetic. Valid for n <= 31.
bool ShapleyWeightsSumToOneExact(int n);

// Floating-point check used before every enumeration.
void ValidateShapleyWeights(int n);

ShapleyEstimate ExactShapley(LocoEvaluator& eval, int driver,
                             int max_features = kDefaultMaxExactFeatures);

// Permutation k of a Monte-Carlo run draws its ordering from
// DeriveSeed(seed, {k}), so single-driver and all-driver runs agree.
ShapleyEstimate MonteCarloShapley(LocoEvaluator& eval, int driver, int n_permutations,
                                  uint64_t seed);

struct ShapleyResult {
  std::vector<ShapleyEstimate> global;  // one per driver
  Eigen::MatrixXd local;                // N x p; empty unless requested
};

ShapleyResult ExactShapleyAll(LocoEvaluator& eval, bool with_local, int workers = 1,
                              int max_features = kDefaultMaxExactFeatures);
ShapleyResult MonteCarloShapleyAll(LocoEvaluator& eval, int n_permutations, uint64_t seed,
                                   bool with_local, int workers = 1);

// Local Shapley effect of one pattern for one driver.
double LocalShapley(LocoEvaluator& eval, int driver, size_t pattern, ShapleyMethod method,
                    int n_permutations = 0, uint64_t seed = 0);

}  // namespace hifi
