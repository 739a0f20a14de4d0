#ifndef HIFI_HIFI_H_
#define HIFI_HIFI_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HIFI_BUILDING_LIBRARY)
#define HIFI_API __declspec(dllexport)
#else
#define HIFI_API __declspec(dllimport)
#endif
#else
#define HIFI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum hifi_status {
  HIFI_OK = 0,
  HIFI_ERR_CONFIG = 1,
  HIFI_ERR_IO = 2,
  HIFI_ERR_NUMERIC = 3,
  HIFI_ERR_ARGUMENT = 4,
  HIFI_ERR_INTERNAL = 5
} hifi_status;

/* Message of the last failed call on this thread; "" after success. */
HIFI_API const char* hifi_last_error(void);
HIFI_API const char* hifi_version(void);

/* ---- run configuration ---- */

typedef struct hifi_config hifi_config;

HIFI_API hifi_status hifi_config_create(hifi_config** out);
HIFI_API hifi_status hifi_config_load(const char* path, hifi_config** out);
/* Same keys as the config file. Relative paths resolve against the working
   directory. */
HIFI_API hifi_status hifi_config_set(hifi_config* config, const char* key, const char* value);
/* Writes the config as key = value text; *needed receives the full size
   including the terminator. */
HIFI_API hifi_status hifi_config_text(const hifi_config* config, char* buffer, size_t size,
                                      size_t* needed);
/* Fails with HIFI_ERR_CONFIG when no seed is set. */
HIFI_API hifi_status hifi_config_seed(const hifi_config* config, uint64_t* out);
HIFI_API void hifi_config_free(hifi_config* config);

HIFI_API hifi_status hifi_run_analyze(const hifi_config* config);
HIFI_API hifi_status hifi_run_local(const hifi_config* config);
/* feature may be NULL to use the uthresh_feature key. */
HIFI_API hifi_status hifi_run_uthresh(const hifi_config* config, const char* feature);
HIFI_API hifi_status hifi_run_oracle(const hifi_config* config, size_t* drivers, size_t* matches);

/* ---- synthetic data ---- */

typedef struct hifi_synth_spec {
  const char* family; /* suppressor, duplicate, additive-independent,
                         correlated-block, noise-only */
  size_t n_patterns;
  double noise; /* negative selects the family default */
  uint64_t seed;
  size_t n_features; /* 0 selects the family default */
  size_t n_groups;   /* > 0 adds a "group" ID column */
} hifi_synth_spec;

HIFI_API void hifi_synth_spec_init(hifi_synth_spec* spec);
HIFI_API hifi_status hifi_synth_write(const hifi_synth_spec* spec, const char* path);
/* Population U, R, S per feature; arrays hold n_features entries. */
HIFI_API hifi_status hifi_synth_targets(const hifi_synth_spec* spec, double* unique,
                                        double* redundant, double* synergistic, size_t n_features);

/* ---- datasets ---- */

typedef struct hifi_dataset hifi_dataset;

/* ignore: comma-separated ID columns, may be NULL. */
HIFI_API hifi_status hifi_dataset_load_csv(const char* path, const char* target, const char* ignore,
                                           hifi_dataset** out);
/* Row-major n x p features; standardized on construction. names may be NULL. */
HIFI_API hifi_status hifi_dataset_from_arrays(const double* features, const double* target, size_t n,
                                              size_t p, const char* const* names,
                                              hifi_dataset** out);
HIFI_API size_t hifi_dataset_n_patterns(const hifi_dataset* data);
HIFI_API size_t hifi_dataset_n_features(const hifi_dataset* data);
/* NULL when j is out of range. */
HIFI_API const char* hifi_dataset_feature_name(const hifi_dataset* data, size_t j);
/* Copies the standardized value; NaN when out of range. */
HIFI_API double hifi_dataset_value(const hifi_dataset* data, size_t i, size_t j);
HIFI_API void hifi_dataset_free(hifi_dataset* data);

/* ---- engine ---- */

typedef enum hifi_scheme { HIFI_IN_SAMPLE = 0, HIFI_CROSS_FIT = 1 } hifi_scheme;

typedef struct hifi_engine_options {
  hifi_scheme scheme;
  int folds;
  int n_surrogates;
  double alpha;
  uint64_t seed;
  int workers;
} hifi_engine_options;

typedef struct hifi_engine hifi_engine;

HIFI_API void hifi_engine_options_init(hifi_engine_options* options);
/* The engine keeps its own reference to the dataset. options may be NULL. */
HIFI_API hifi_status hifi_engine_create(const hifi_dataset* data, const hifi_engine_options* options,
                                        hifi_engine** out);
HIFI_API void hifi_engine_free(hifi_engine* engine);

/* L_z(driver -> y) for the conditioning set z given as feature indices. */
HIFI_API hifi_status hifi_loco(hifi_engine* engine, int driver, const int* subset, size_t subset_size,
                               double* out);

typedef struct hifi_decomposition {
  int driver;
  double l_empty;
  double l_min;
  double l_max;
  double unique;
  double redundant;
  double synergistic;
  size_t min_path_length;
  size_t max_path_length;
} hifi_decomposition;

/* min_path/max_path receive the added features in order; each may be NULL
   or must hold n_features entries. */
HIFI_API hifi_status hifi_decompose(hifi_engine* engine, int driver, hifi_decomposition* out,
                                    int* min_path, int* max_path);

typedef enum hifi_score_kind {
  HIFI_LOCAL_LOCO = 0,
  HIFI_LOCAL_UNIQUE = 1,
  HIFI_LOCAL_REDUNDANT = 2,
  HIFI_LOCAL_SYNERGISTIC = 3
} hifi_score_kind;

/* Row-major n x p matrix of local scores for every driver. */
HIFI_API hifi_status hifi_local_scores(hifi_engine* engine, hifi_score_kind kind, double* out,
                                       size_t size);

/* One value per feature. */
HIFI_API hifi_status hifi_shapley_exact(hifi_engine* engine, double* values, size_t size);
HIFI_API hifi_status hifi_shapley_mc(hifi_engine* engine, int n_permutations, uint64_t seed,
                                     double* values, double* standard_errors, size_t size);

#ifdef __cplusplus
}
#endif

#endif
