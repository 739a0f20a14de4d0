#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "hifi/hifi.h"

namespace {

struct CommonFlags {
  std::string config;
  std::string seed;
  std::string workers;
  std::string outdir;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, bool config_required, bool with_outdir) {
  auto* c = cmd->add_option("--config", flags.config, "key = value run configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", flags.seed, "master seed, overrides the config");
  cmd->add_option("--workers", flags.workers, "worker threads, overrides the config");
  if (with_outdir) cmd->add_option("--outdir", flags.outdir, "output directory, overrides the config");
}

int Report(hifi_status status) {
  if (status != HIFI_OK) std::fprintf(stderr, "hifi: %s\n", hifi_last_error());
  return static_cast<int>(status);
}

// Loads the config and applies flag overrides; nullptr after an error.
hifi_config* LoadWithOverrides(const CommonFlags& flags, hifi_status* status) {
  hifi_config* config = nullptr;
  *status = flags.config.empty() ? hifi_config_create(&config) : hifi_config_load(flags.config.c_str(), &config);
  if (*status != HIFI_OK) return nullptr;
  const std::pair<const char*, const std::string*> overrides[] = {
      {"seed", &flags.seed}, {"workers", &flags.workers}, {"outdir", &flags.outdir}};
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    *status = hifi_config_set(config, key, value->c_str());
    if (*status != HIFI_OK) {
      hifi_config_free(config);
      return nullptr;
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unique, redundant and synergistic feature importance for regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hifi_version()));

  CommonFlags analyze_flags, local_flags, uthresh_flags, oracle_flags, synth_flags;
  auto* analyze = app.add_subcommand("analyze", "global U, R, S, Shapley and multiplet paths");
  AddCommon(analyze, analyze_flags, true, true);
  auto* local = app.add_subcommand("local", "per-pattern scores and column orderings");
  AddCommon(local, local_flags, true, true);
  auto* uthresh = app.add_subcommand("uthresh", "correlation and histograms after discarding low-U patterns");
  AddCommon(uthresh, uthresh_flags, true, true);
  std::string feature, sweep;
  uthresh->add_option("--feature", feature, "driver feature, overrides uthresh_feature");
  uthresh->add_option("--sweep", sweep, "comma-separated discard percentages");
  auto* oracle = app.add_subcommand("oracle", "compare greedy search with exhaustive enumeration");
  AddCommon(oracle, oracle_flags, true, true);
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset with known decomposition");
  AddCommon(synth, synth_flags, false, false);
  std::string family = "suppressor", out;
  size_t n = 10000, features = 0, groups = 0;
  double noise = -1.0;
  synth->add_option("--family", family, "suppressor, duplicate, additive-independent, correlated-block, noise-only");
  synth->add_option("--n", n, "number of patterns");
  synth->add_option("--noise", noise, "target noise sd, family default when omitted");
  synth->add_option("--features", features, "feature count where the family allows it");
  synth->add_option("--groups", groups, "add a group ID column with this many labels");
  synth->add_option("--out", out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return HIFI_ERR_CONFIG;
  }

  if (synth->parsed()) {
    hifi_synth_spec spec;
    hifi_synth_spec_init(&spec);
    spec.family = family.c_str();
    spec.n_patterns = n;
    spec.noise = noise;
    spec.n_features = features;
    spec.n_groups = groups;
    if (!synth_flags.seed.empty()) {
      try {
        spec.seed = std::stoull(synth_flags.seed);
      } catch (const std::exception&) {
        std::fprintf(stderr, "hifi: invalid seed '%s'\n", synth_flags.seed.c_str());
        return HIFI_ERR_CONFIG;
      }
    } else if (!synth_flags.config.empty()) {
      hifi_status status;
      hifi_config* config = LoadWithOverrides(synth_flags, &status);
      if (config == nullptr) return Report(status);
      status = hifi_config_seed(config, &spec.seed);
      hifi_config_free(config);
      if (status != HIFI_OK) return Report(status);
    } else {
      std::fprintf(stderr, "hifi: synth needs --seed or a config with a seed\n");
      return HIFI_ERR_CONFIG;
    }
    return Report(hifi_synth_write(&spec, out.c_str()));
  }

  const CommonFlags& flags = analyze->parsed()  ? analyze_flags
                             : local->parsed()  ? local_flags
                             : uthresh->parsed() ? uthresh_flags
                                                 : oracle_flags;
  hifi_status status;
  hifi_config* config = LoadWithOverrides(flags, &status);
  if (config == nullptr) return Report(status);
  if (uthresh->parsed() && !sweep.empty()) status = hifi_config_set(config, "uthresh_sweep", sweep.c_str());

  if (status == HIFI_OK) {
    if (analyze->parsed()) {
      status = hifi_run_analyze(config);
    } else if (local->parsed()) {
      status = hifi_run_local(config);
    } else if (uthresh->parsed()) {
      status = hifi_run_uthresh(config, feature.empty() ? nullptr : feature.c_str());
    } else {
      size_t drivers = 0, matches = 0;
      status = hifi_run_oracle(config, &drivers, &matches);
      if (status == HIFI_OK) std::printf("oracle: %zu of %zu drivers match\n", matches, drivers);
    }
  }
  hifi_config_free(config);
  return Report(status);
}
