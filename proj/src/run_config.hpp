#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "hifi_global.hpp"
#include "regress.hpp"

namespace hifi {

// Folds used by cross-fit when kfold is not given.
inline constexpr int kDefaultFolds = 5;

enum class ShapleyChoice { kAuto, kExact, kMonteCarlo };

// Parsed key = value run configuration.
//
//   input           CSV path (relative paths resolve against the config file)
//   target          target column
//   ignore          comma-separated ID columns, carried through to outputs
//   exclude         comma-separated columns dropped before modeling
//   group           ID column whose groups get per-group local means
//   class           ID column used as classes in uthresh histograms
//   drop_missing    true/false, drop rows with missing cells
//   scheme          in-sample | cross-fit
//   kfold           folds for cross-fit
//   n_surrogates    surrogate count (>= 20)
//   alpha           surrogate significance level
//   shapley_method  auto | exact | mc
//   n_permutations  Monte-Carlo permutations (>= 100)
//   seed            master seed, mandatory
//   workers         worker threads
//   outdir          output directory
//   hist_bins       uthresh histogram bins
//   uthresh_feature default uthresh driver
//   uthresh_sweep   comma-separated discard percentages
struct RunConfig {
  std::filesystem::path input;
  std::string target;
  std::vector<std::string> ignore;
  std::vector<std::string> exclude;
  std::string group;
  std::string class_column;
  bool drop_missing = false;
  EvalScheme scheme;
  SurrogateConfig surrogate;
  ShapleyChoice shapley = ShapleyChoice::kAuto;
  int n_permutations = 2000;
  std::optional<uint64_t> seed;
  int workers = 1;
  std::filesystem::path outdir = "hifi_out";
  int hist_bins = 30;
  std::string uthresh_feature;
  std::vector<double> uthresh_sweep = {0, 10, 20, 30, 40, 50, 60, 70, 80, 85};

  // Applies one key; throws a config error for unknown keys or bad values.
  void Set(const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir = {});
  // Checks mandatory keys and ranges; derives dependent seeds.
  void Finalize();
  uint64_t master_seed() const;

  // key = value lines in a fixed key order; parses back to an equal config.
  std::string ToText() const;
};

RunConfig ParseConfig(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig LoadConfig(const std::filesystem::path& path);

const char* ShapleyChoiceName(ShapleyChoice c);

}  // namespace hifi
