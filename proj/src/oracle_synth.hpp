#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "regress.hpp"

namespace hifi {

// Synthetic regression families with known population decompositions.
//
// All variables are Gaussian, so every population LOCO follows from the
// correlation matrix R of (features, y): the error of y given a set S is
// 1 - r_S' R_SS^+ r_S. For the suppressor family (x, eta iid, z = x + eta,
// y = eta + s e) this gives L_empty(x) = 0 and L_{z}(x) = 0.5 / (1 + s^2):
// pure synergy. For the duplicate family (z = x, y = x + s e) it gives
// L_empty(x) = 1 / (1 + s^2) and L_{z}(x) = 0: pure redundancy, 0.5 at s = 1.
enum class SynthFamily { kSuppressor, kDuplicate, kAdditiveIndependent, kCorrelatedBlock, kNoiseOnly };

const char* SynthFamilyName(SynthFamily f);
SynthFamily ParseSynthFamily(const std::string& name);

struct SyntheticSpec {
  SynthFamily family = SynthFamily::kSuppressor;
  size_t n_patterns = 10000;
  // Standard deviation of the additive target noise. Family default when unset:
  // suppressor 0, duplicate 1, additive 0.5, correlated-block 0.5, noise-only 1.
  std::optional<double> noise;
  uint64_t seed = 0;
  // Additive, correlated-block (even) and noise-only only; fixed at 2 otherwise.
  size_t n_features = 0;
  // Additive only; default (0.6, 0.8) for two features, else proportional to
  // 1..p, scaled to unit norm.
  std::vector<double> betas;
  // Adds an ID column "group" cycling through this many labels when > 0.
  size_t n_groups = 0;

  double ResolvedNoise() const;
  size_t ResolvedFeatures() const;
};

struct PopulationTargets {
  std::vector<double> l_empty;
  std::vector<double> unique;
  std::vector<double> redundant;
  std::vector<double> synergistic;
};

struct SyntheticData {
  RawTable table;
  Eigen::MatrixXd population_correlation;  // (p + 1) x (p + 1), target last
  PopulationTargets targets;  // empty when p > kMaxTargetFeatures
};

inline constexpr size_t kMaxTargetFeatures = 16;

SyntheticData Generate(const SyntheticSpec& spec);

// Population covariance of (features, y), target last, before standardization.
Eigen::MatrixXd PopulationCovariance(const SyntheticSpec& spec);

// Exhaustive min/max over all conditioning subsets of the population LOCO.
PopulationTargets PopulationDecomposition(const Eigen::MatrixXd& covariance);

struct ExhaustiveResult {
  double l_min = 0.0;
  FeatureSubset z_min;
  double l_max = 0.0;
  FeatureSubset z_max;
};

inline constexpr int kMaxExhaustiveFeatures = 16;
// Values within this distance count as ties.
inline constexpr double kOracleTieTolerance = 1e-12;

// Evaluates L_z for all 2^(p-1) subsets. Ties go to the smaller subset, then
// the lexicographically smaller one.
ExhaustiveResult ExhaustiveMinMax(LocoEvaluator& eval, int driver,
                                  int max_features = kMaxExhaustiveFeatures);

// Subsets of `members` ordered by size, then lexicographically.
std::vector<FeatureSubset> OrderedSubsets(const std::vector<int>& members);

}  // namespace hifi
