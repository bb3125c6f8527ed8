/*
 * gwloc C API.
 *
 * Guided-wave damage localization: dataset simulation, a grid-search
 * physical-model localizer, a fully-connected regression network and SNR
 * sweeps of the average localization error. All objects are opaque handles
 * released with the matching *_free function. Every fallible call returns a
 * gwloc_status; on failure gwloc_last_error() describes the cause for the
 * calling thread.
 */
#ifndef GWLOC_H_
#define GWLOC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(GWLOC_BUILDING)
#define GWLOC_API __attribute__((visibility("default")))
#else
#define GWLOC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gwloc_status {
  GWLOC_OK = 0,
  GWLOC_ERR_INVALID_ARGUMENT = 1,
  GWLOC_ERR_INDEX = 2,
  GWLOC_ERR_DOMAIN = 3,
  GWLOC_ERR_GEOMETRY = 4,
  GWLOC_ERR_DEGENERATE_SIGNAL = 5,
  GWLOC_ERR_SPLIT = 6,
  GWLOC_ERR_SHAPE = 7,
  GWLOC_ERR_TRAINING = 8,
  GWLOC_ERR_FORMAT = 9,
  GWLOC_ERR_IO = 10,
  GWLOC_ERR_INTERNAL = 11
} gwloc_status;

typedef struct gwloc_dataset gwloc_dataset;
typedef struct gwloc_model gwloc_model;
typedef struct gwloc_heatmap gwloc_heatmap;
typedef struct gwloc_report gwloc_report;

GWLOC_API const char* gwloc_version(void);
GWLOC_API const char* gwloc_status_string(gwloc_status status);
/* Message of the last failed call on this thread; "" if none. */
GWLOC_API const char* gwloc_last_error(void);

/* ---- dispersion ---------------------------------------------------------- */

typedef enum gwloc_mode_kind {
  GWLOC_MODE_LINEAR = 0,     /* kappa = omega / c, constant = c in m/s      */
  GWLOC_MODE_SQUARE_ROOT = 1 /* kappa = sqrt(omega / d), constant = d m^2/s */
} gwloc_mode_kind;

typedef struct gwloc_mode {
  gwloc_mode_kind kind;
  double constant;
} gwloc_mode;

/* alpha * kappa_mode(omega) for a model built from `modes`. */
GWLOC_API gwloc_status gwloc_wavenumber(const gwloc_mode* modes, size_t mode_count, double alpha,
                                        size_t mode_index, double omega, double* out);
GWLOC_API gwloc_status gwloc_group_velocity(const gwloc_mode* modes, size_t mode_count, double alpha,
                                            size_t mode_index, double omega, double* out);
GWLOC_API gwloc_status gwloc_sample_alpha(uint64_t seed, double* out);

/* ---- dataset (GWDS files) ------------------------------------------------ */

typedef struct gwloc_gen_config {
  uint32_t samples;       /* t */
  uint32_t bins;          /* Q */
  double f_max_hz;
  uint32_t sensors;       /* m; M = m (m - 1) ordered pairs */
  double plate_length;
  double plate_width;
  const gwloc_mode* modes; /* NULL selects the built-in two-mode model */
  size_t mode_count;
  int alpha_fixed;        /* 0: truncated Gaussian in [0.7, 1.3]; 1: fixed_alpha */
  double fixed_alpha;
  double snr_db;          /* INFINITY disables noise */
  double train_fraction;
  int per_sample_sensors;
  int window_enabled;
  double window_center_hz;
  double window_width_hz;
  uint64_t seed;
  uint32_t threads;       /* 0: hardware concurrency; never changes results */
} gwloc_gen_config;

/* Desk-scale defaults: t = 500, Q = 250, 1 MHz, m = 8, unit plate, 25 dB. */
GWLOC_API void gwloc_gen_config_default(gwloc_gen_config* config);
/* Turns `config` into the ideal variant: alpha = 1, no noise. */
GWLOC_API void gwloc_gen_config_make_ideal(gwloc_gen_config* config);

typedef struct gwloc_dataset_info {
  uint32_t samples;
  uint32_t bins;
  uint32_t pairs;
  uint32_t sensors;
  uint32_t train_count;
  uint32_t test_count;
  double f_max_hz;
  uint64_t seed;
  int standardized;
  int has_clean;
} gwloc_dataset_info;

typedef struct gwloc_sample_info {
  double label_x;
  double label_y;
  double alpha;
  double snr_db;
  uint64_t seed;
} gwloc_sample_info;

GWLOC_API gwloc_status gwloc_dataset_generate(const gwloc_gen_config* config, gwloc_dataset** out);
GWLOC_API gwloc_status gwloc_dataset_load(const char* path, gwloc_dataset** out);
GWLOC_API gwloc_status gwloc_dataset_save(const gwloc_dataset* ds, const char* path);
GWLOC_API void gwloc_dataset_free(gwloc_dataset* ds);
GWLOC_API gwloc_status gwloc_dataset_get_info(const gwloc_dataset* ds, gwloc_dataset_info* out);
GWLOC_API gwloc_status gwloc_dataset_get_sample(const gwloc_dataset* ds, size_t index, gwloc_sample_info* out);
/* Copies Q*M q-major floats of the data (clean = 0) or clean (clean = 1) record. */
GWLOC_API gwloc_status gwloc_dataset_copy_record(const gwloc_dataset* ds, size_t index, int clean, float* out,
                                                 size_t capacity);
/* Fits per-feature statistics on the train split and standardizes in place. */
GWLOC_API gwloc_status gwloc_dataset_standardize(gwloc_dataset* ds);
/* SHA-256 (hex) of the file the dataset was loaded from, or of its serialization. */
GWLOC_API const char* gwloc_dataset_hash(const gwloc_dataset* ds);

/* ---- neural localizer (GWNN files) --------------------------------------- */

typedef enum gwloc_optimizer { GWLOC_OPT_ADAM = 0, GWLOC_OPT_SGD = 1 } gwloc_optimizer;

typedef struct gwloc_train_config {
  const uint32_t* hidden; /* NULL selects 300, 200, 50 */
  size_t hidden_count;
  double dropout;
  uint32_t epochs;
  uint32_t batch_size;
  double learning_rate;
  gwloc_optimizer optimizer;
  uint64_t seed;
} gwloc_train_config;

/* `epoch` counts from 1. */
typedef void (*gwloc_epoch_callback)(uint32_t epoch, double mean_loss, void* user);

GWLOC_API void gwloc_train_config_default(gwloc_train_config* config);
/* Standardizes `ds` in place when it is not yet, then trains on its train split. */
GWLOC_API gwloc_status gwloc_model_train(gwloc_dataset* ds, const gwloc_train_config* config,
                                         gwloc_epoch_callback on_epoch, void* user, gwloc_model** out);
GWLOC_API gwloc_status gwloc_model_load(const char* path, gwloc_model** out);
GWLOC_API gwloc_status gwloc_model_save(const gwloc_model* model, const char* path);
GWLOC_API void gwloc_model_free(gwloc_model* model);
GWLOC_API size_t gwloc_model_input_dim(const gwloc_model* model);
GWLOC_API const char* gwloc_model_hash(const gwloc_model* model);
/* Flat q-major Q*M record; raw unless `standardized` is nonzero. */
GWLOC_API gwloc_status gwloc_model_predict(const gwloc_model* model, const float* sample, size_t length,
                                           int standardized, double* x, double* y);

/* ---- physical localizer heatmaps ----------------------------------------- */

typedef struct gwloc_heatmap_config {
  uint32_t nx;
  uint32_t ny;
  uint32_t subsamples; /* template points per cell side; 1 = cell centers */
  int use_clean;       /* score the clean record instead of the data record */
  uint32_t threads;
} gwloc_heatmap_config;

GWLOC_API void gwloc_heatmap_config_default(gwloc_heatmap_config* config);
GWLOC_API gwloc_status gwloc_heatmap_compute(const gwloc_dataset* ds, size_t sample_index,
                                             const gwloc_heatmap_config* config, gwloc_heatmap** out);
GWLOC_API void gwloc_heatmap_free(gwloc_heatmap* map);
GWLOC_API gwloc_status gwloc_heatmap_argmax(const gwloc_heatmap* map, double* x, double* y, double* score);
GWLOC_API gwloc_status gwloc_heatmap_truth(const gwloc_heatmap* map, double* x, double* y);
/* Writes the score CSV and the JSON sidecar; `run_config_json` may be NULL. */
GWLOC_API gwloc_status gwloc_heatmap_write(const gwloc_heatmap* map, const char* csv_path, const char* json_path,
                                           const char* run_config_json);

/* ---- evaluation sweeps ---------------------------------------------------- */

typedef struct gwloc_sweep_config {
  const double* snrs;
  size_t snr_count;
  const char* split; /* "test" (default when NULL), "train" or "all" */
  int physical;      /* include the grid-search baseline */
  uint32_t physical_nx;
  uint32_t physical_ny;
  uint32_t physical_subsamples;
  uint64_t seed;
  uint32_t threads;
} gwloc_sweep_config;

GWLOC_API void gwloc_sweep_config_default(gwloc_sweep_config* config);
/* models[i] is reported under model_ids[i]; the baseline as "physical". */
GWLOC_API gwloc_status gwloc_eval_sweep(const gwloc_dataset* ds, const gwloc_sweep_config* config,
                                        const gwloc_model* const* models, const char* const* model_ids,
                                        size_t model_count, gwloc_report** out);
GWLOC_API void gwloc_report_free(gwloc_report* report);
GWLOC_API size_t gwloc_report_row_count(const gwloc_report* report);

typedef struct gwloc_report_row {
  const char* method; /* valid while the report lives */
  double snr_db;
  double ale_mean;
  double ale_std;
  size_t n;
} gwloc_report_row;

GWLOC_API gwloc_status gwloc_report_get_row(const gwloc_report* report, size_t index, gwloc_report_row* out);
GWLOC_API gwloc_status gwloc_report_write(const gwloc_report* report, const char* csv_path, const char* json_path,
                                          const char* run_config_json);

/* Mean and population std of Euclidean errors over n (truth, prediction) pairs,
 * each given as x, y arrays. */
GWLOC_API gwloc_status gwloc_ale(const double* truth_x, const double* truth_y, const double* pred_x,
                                 const double* pred_y, size_t n, double* mean, double* stddev);

#ifdef __cplusplus
}
#endif

#endif /* GWLOC_H_ */
