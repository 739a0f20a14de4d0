#include "hifi/hifi.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "hifi_global.hpp"
#include "hifi_local.hpp"
#include "oracle_synth.hpp"
#include "pipeline.hpp"
#include "regress.hpp"
#include "rng.hpp"
#include "run_config.hpp"
#include "shapley.hpp"

struct hifi_config {
  hifi::RunConfig config;
};

struct hifi_dataset {
  std::shared_ptr<const hifi::Dataset> data;
};

struct hifi_engine {
  std::shared_ptr<const hifi::Dataset> data;
  std::unique_ptr<hifi::LocoEvaluator> eval;
  hifi::SurrogateConfig surrogate;
  int workers = 1;
  std::optional<std::vector<hifi::FeatureDecomposition>> decompositions;
};

namespace {

thread_local std::string g_last_error;

hifi_status Record(hifi_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
hifi_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HIFI_OK;
  } catch (const hifi::Error& e) {
    return Record(static_cast<hifi_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Record(HIFI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Record(HIFI_ERR_INTERNAL, e.what());
  } catch (...) {
    return Record(HIFI_ERR_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) hifi::Fail(hifi::ErrorCode::kArgument, what);
}

std::vector<std::string> SplitList(const char* text) {
  std::vector<std::string> out;
  if (text == nullptr) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

hifi::SyntheticSpec ToSpec(const hifi_synth_spec* s) {
  Require(s != nullptr && s->family != nullptr, "synth spec and family are required");
  hifi::SyntheticSpec spec;
  spec.family = hifi::ParseSynthFamily(s->family);
  spec.n_patterns = s->n_patterns;
  if (s->noise >= 0) spec.noise = s->noise;
  spec.seed = s->seed;
  spec.n_features = s->n_features;
  spec.n_groups = s->n_groups;
  return spec;
}

const std::vector<hifi::FeatureDecomposition>& Decompositions(hifi_engine* e) {
  if (!e->decompositions) e->decompositions = hifi::DecomposeAll(*e->eval, e->surrogate, e->workers);
  return *e->decompositions;
}

void CheckDriver(const hifi_engine* e, int driver) {
  Require(driver >= 0 && static_cast<size_t>(driver) < e->data->n_features(), "driver index out of range");
}

}  // namespace

extern "C" {

const char* hifi_last_error(void) { return g_last_error.c_str(); }

const char* hifi_version(void) { return hifi::kEngineVersion; }

hifi_status hifi_config_create(hifi_config** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = new hifi_config();
  });
}

hifi_status hifi_config_load(const char* path, hifi_config** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path and out are required");
    auto c = std::make_unique<hifi_config>();
    c->config = hifi::LoadConfig(path);
    *out = c.release();
  });
}

hifi_status hifi_config_set(hifi_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config != nullptr && key != nullptr && value != nullptr, "config, key and value are required");
    config->config.Set(key, value, std::filesystem::current_path());
  });
}

hifi_status hifi_config_text(const hifi_config* config, char* buffer, size_t size, size_t* needed) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    const std::string text = config->config.ToText();
    if (needed != nullptr) *needed = text.size() + 1;
    if (buffer != nullptr && size > 0) {
      const size_t n = std::min(size - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

hifi_status hifi_config_seed(const hifi_config* config, uint64_t* out) {
  return Guard([&] {
    Require(config != nullptr && out != nullptr, "config and out are required");
    *out = config->config.master_seed();
  });
}

void hifi_config_free(hifi_config* config) { delete config; }

hifi_status hifi_run_analyze(const hifi_config* config) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    hifi::RunAnalyze(config->config);
  });
}

hifi_status hifi_run_local(const hifi_config* config) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    hifi::RunLocal(config->config);
  });
}

hifi_status hifi_run_uthresh(const hifi_config* config, const char* feature) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    hifi::RunThreshold(config->config, feature != nullptr ? feature : "");
  });
}

hifi_status hifi_run_oracle(const hifi_config* config, size_t* drivers, size_t* matches) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    const auto summary = hifi::RunOracle(config->config);
    if (drivers != nullptr) *drivers = summary.drivers;
    if (matches != nullptr) *matches = summary.matches;
  });
}

void hifi_synth_spec_init(hifi_synth_spec* spec) {
  if (spec == nullptr) return;
  spec->family = "suppressor";
  spec->n_patterns = 10000;
  spec->noise = -1.0;
  spec->seed = 0;
  spec->n_features = 0;
  spec->n_groups = 0;
}

hifi_status hifi_synth_write(const hifi_synth_spec* spec, const char* path) {
  return Guard([&] {
    Require(path != nullptr, "path is null");
    const auto data = hifi::Generate(ToSpec(spec));
    hifi::WriteCsv(data.table, path);
  });
}

hifi_status hifi_synth_targets(const hifi_synth_spec* spec, double* unique, double* redundant,
                               double* synergistic, size_t n_features) {
  return Guard([&] {
    const auto s = ToSpec(spec);
    Require(n_features == s.ResolvedFeatures(), "n_features does not match the family");
    const auto t = hifi::PopulationDecomposition(hifi::PopulationCovariance(s));
    for (size_t j = 0; j < n_features; ++j) {
      if (unique != nullptr) unique[j] = t.unique[j];
      if (redundant != nullptr) redundant[j] = t.redundant[j];
      if (synergistic != nullptr) synergistic[j] = t.synergistic[j];
    }
  });
}

hifi_status hifi_dataset_load_csv(const char* path, const char* target, const char* ignore,
                                  hifi_dataset** out) {
  return Guard([&] {
    Require(path != nullptr && target != nullptr && out != nullptr, "path, target and out are required");
    hifi::CsvOptions options;
    options.target = target;
    options.id_columns = SplitList(ignore);
    auto [data, report] = hifi::Standardize(hifi::LoadCsv(path, options));
    *out = new hifi_dataset{std::make_shared<const hifi::Dataset>(std::move(data))};
  });
}

hifi_status hifi_dataset_from_arrays(const double* features, const double* target, size_t n, size_t p,
                                     const char* const* names, hifi_dataset** out) {
  return Guard([&] {
    Require(features != nullptr && target != nullptr && out != nullptr, "features, target and out are required");
    hifi::RawTable table;
    table.target_name = "y";
    table.target.assign(target, target + n);
    for (size_t j = 0; j < p; ++j) {
      std::string name = names != nullptr && names[j] != nullptr ? names[j] : "x" + std::to_string(j + 1);
      table.feature_names.push_back(name);
      table.column_order.push_back(name);
      std::vector<double> col(n);
      for (size_t i = 0; i < n; ++i) col[i] = features[i * p + j];
      table.features.push_back(std::move(col));
    }
    table.column_order.push_back(table.target_name);
    auto [data, report] = hifi::Standardize(table);
    *out = new hifi_dataset{std::make_shared<const hifi::Dataset>(std::move(data))};
  });
}

size_t hifi_dataset_n_patterns(const hifi_dataset* data) { return data ? data->data->n_patterns() : 0; }

size_t hifi_dataset_n_features(const hifi_dataset* data) { return data ? data->data->n_features() : 0; }

const char* hifi_dataset_feature_name(const hifi_dataset* data, size_t j) {
  if (data == nullptr || j >= data->data->n_features()) return nullptr;
  return data->data->feature_names()[j].c_str();
}

double hifi_dataset_value(const hifi_dataset* data, size_t i, size_t j) {
  if (data == nullptr || i >= data->data->n_patterns() || j >= data->data->n_features()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return data->data->values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

void hifi_dataset_free(hifi_dataset* data) { delete data; }

void hifi_engine_options_init(hifi_engine_options* options) {
  if (options == nullptr) return;
  options->scheme = HIFI_IN_SAMPLE;
  options->folds = 5;
  options->n_surrogates = 100;
  options->alpha = 0.05;
  options->seed = 0;
  options->workers = 1;
}

hifi_status hifi_engine_create(const hifi_dataset* data, const hifi_engine_options* options,
                               hifi_engine** out) {
  return Guard([&] {
    Require(data != nullptr && out != nullptr, "data and out are required");
    hifi_engine_options o;
    hifi_engine_options_init(&o);
    if (options != nullptr) o = *options;
    hifi::EvalScheme scheme = o.scheme == HIFI_CROSS_FIT
                                  ? hifi::EvalScheme::CrossFit(o.folds, hifi::DeriveSeed(o.seed, {3}))
                                  : hifi::EvalScheme::InSample();
    scheme.Validate();
    auto e = std::make_unique<hifi_engine>();
    e->data = data->data;
    e->surrogate.n_surrogates = o.n_surrogates;
    e->surrogate.alpha = o.alpha;
    e->surrogate.seed = hifi::DeriveSeed(o.seed, {1});
    e->surrogate.Validate();
    Require(o.workers >= 1, "workers must be at least 1");
    e->workers = o.workers;
    e->eval = std::make_unique<hifi::LocoEvaluator>(*e->data, scheme);
    *out = e.release();
  });
}

void hifi_engine_free(hifi_engine* engine) { delete engine; }

hifi_status hifi_loco(hifi_engine* engine, int driver, const int* subset, size_t subset_size, double* out) {
  return Guard([&] {
    Require(engine != nullptr && out != nullptr, "engine and out are required");
    Require(subset != nullptr || subset_size == 0, "subset is null");
    CheckDriver(engine, driver);
    std::vector<int> members(subset, subset + subset_size);
    for (int j : members) CheckDriver(engine, j);
    *out = engine->eval->Loco(driver, hifi::FeatureSubset(std::move(members)));
  });
}

hifi_status hifi_decompose(hifi_engine* engine, int driver, hifi_decomposition* out, int* min_path,
                           int* max_path) {
  return Guard([&] {
    Require(engine != nullptr && out != nullptr, "engine and out are required");
    CheckDriver(engine, driver);
    const auto& d = Decompositions(engine)[static_cast<size_t>(driver)];
    *out = {d.driver, d.l_empty, d.l_min, d.l_max, d.unique, d.redundant, d.synergistic,
            d.min_path.steps.size(), d.max_path.steps.size()};
    for (size_t k = 0; min_path != nullptr && k < d.min_path.steps.size(); ++k) {
      min_path[k] = d.min_path.steps[k].feature;
    }
    for (size_t k = 0; max_path != nullptr && k < d.max_path.steps.size(); ++k) {
      max_path[k] = d.max_path.steps[k].feature;
    }
  });
}

hifi_status hifi_local_scores(hifi_engine* engine, hifi_score_kind kind, double* out, size_t size) {
  return Guard([&] {
    Require(engine != nullptr && out != nullptr, "engine and out are required");
    const size_t n = engine->data->n_patterns();
    const size_t p = engine->data->n_features();
    Require(size == n * p, "output size must be n_patterns * n_features");
    const auto scores = hifi::ComputeLocalScores(*engine->eval, Decompositions(engine), engine->workers);
    const hifi::LocalScoreMatrix* m = nullptr;
    switch (kind) {
      case HIFI_LOCAL_LOCO: m = &scores.loco_max; break;
      case HIFI_LOCAL_UNIQUE: m = &scores.unique; break;
      case HIFI_LOCAL_REDUNDANT: m = &scores.redundant; break;
      case HIFI_LOCAL_SYNERGISTIC: m = &scores.synergistic; break;
    }
    Require(m != nullptr, "unknown score kind");
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < p; ++j) {
        out[i * p + j] = m->values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  });
}

hifi_status hifi_shapley_exact(hifi_engine* engine, double* values, size_t size) {
  return Guard([&] {
    Require(engine != nullptr && values != nullptr, "engine and values are required");
    Require(size == engine->data->n_features(), "size must equal n_features");
    const auto r = hifi::ExactShapleyAll(*engine->eval, false, engine->workers);
    for (size_t j = 0; j < size; ++j) values[j] = r.global[j].value;
  });
}

hifi_status hifi_shapley_mc(hifi_engine* engine, int n_permutations, uint64_t seed, double* values,
                            double* standard_errors, size_t size) {
  return Guard([&] {
    Require(engine != nullptr && values != nullptr, "engine and values are required");
    Require(size == engine->data->n_features(), "size must equal n_features");
    const auto r = hifi::MonteCarloShapleyAll(*engine->eval, n_permutations, seed, false, engine->workers);
    for (size_t j = 0; j < size; ++j) {
      values[j] = r.global[j].value;
      if (standard_errors != nullptr) standard_errors[j] = r.global[j].standard_error;
    }
  });
}

}  // extern "C"
