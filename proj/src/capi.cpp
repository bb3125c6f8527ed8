#include "gwloc/gwloc.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "gwloc/container.hpp"
#include "gwloc/dataset.hpp"
#include "gwloc/dataset_io.hpp"
#include "gwloc/error.hpp"
#include "gwloc/eval.hpp"
#include "gwloc/mlp.hpp"
#include "gwloc/mlp_io.hpp"
#include "gwloc/physloc.hpp"

using namespace gwloc;

struct gwloc_dataset {
  dataset::WaveDataset ds;
  mutable std::string hash;
};

struct gwloc_model {
  std::shared_ptr<const neuralloc::MlpModel> model;
  mutable std::string hash;
};

struct gwloc_heatmap {
  physloc::Heatmap map;
  wavefield::Point truth;
  std::size_t sample_index = 0;
  nlohmann::json settings;
};

struct gwloc_report {
  eval::LocalizationReport report;
};

namespace {

thread_local std::string g_last_error;

gwloc_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return GWLOC_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIndex: return GWLOC_ERR_INDEX;
    case ErrorCode::kDomain: return GWLOC_ERR_DOMAIN;
    case ErrorCode::kGeometry: return GWLOC_ERR_GEOMETRY;
    case ErrorCode::kDegenerateSignal: return GWLOC_ERR_DEGENERATE_SIGNAL;
    case ErrorCode::kSplit: return GWLOC_ERR_SPLIT;
    case ErrorCode::kShape: return GWLOC_ERR_SHAPE;
    case ErrorCode::kTraining: return GWLOC_ERR_TRAINING;
    case ErrorCode::kFormat: return GWLOC_ERR_FORMAT;
    case ErrorCode::kIo: return GWLOC_ERR_IO;
    case ErrorCode::kInternal: return GWLOC_ERR_INTERNAL;
  }
  return GWLOC_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes and the thread-local message.
template <typename Body>
gwloc_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return GWLOC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GWLOC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GWLOC_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* ptr, const char* what) {
  if (ptr == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

std::vector<dispersion::ModeCurve> to_modes(const gwloc_mode* modes, std::size_t count) {
  if (modes == nullptr) return dispersion::DispersionModel().modes();
  std::vector<dispersion::ModeCurve> out;
  for (std::size_t i = 0; i < count; ++i) {
    switch (modes[i].kind) {
      case GWLOC_MODE_LINEAR: out.push_back(dispersion::ModeCurve::linear(modes[i].constant)); break;
      case GWLOC_MODE_SQUARE_ROOT: out.push_back(dispersion::ModeCurve::square_root(modes[i].constant)); break;
      default: fail(ErrorCode::kInvalidArgument, "unknown mode kind " + std::to_string(modes[i].kind));
    }
  }
  return out;
}

nlohmann::json parse_run_config(const char* text) {
  if (text == nullptr || *text == '\0') return nullptr;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("run config is not valid JSON: ") + e.what());
  }
}

void write_sidecar(const char* path, const nlohmann::json& j) {
  container::write_text(path, j.dump(2) + "\n");
}

}  // namespace

extern "C" {

const char* gwloc_version(void) { return "1.0.0"; }

const char* gwloc_status_string(gwloc_status status) {
  if (status == GWLOC_OK) return "ok";
  if (status < GWLOC_ERR_INVALID_ARGUMENT || status > GWLOC_ERR_INTERNAL) return "unknown status";
  return to_string(static_cast<ErrorCode>(status));
}

const char* gwloc_last_error(void) { return g_last_error.c_str(); }

gwloc_status gwloc_wavenumber(const gwloc_mode* modes, size_t mode_count, double alpha, size_t mode_index,
                              double omega, double* out) {
  return guarded([&] {
    require(modes, "modes");
    require(out, "out");
    *out = dispersion::DispersionModel(to_modes(modes, mode_count), alpha).wavenumber(mode_index, omega);
  });
}

gwloc_status gwloc_group_velocity(const gwloc_mode* modes, size_t mode_count, double alpha, size_t mode_index,
                                  double omega, double* out) {
  return guarded([&] {
    require(modes, "modes");
    require(out, "out");
    *out = dispersion::DispersionModel(to_modes(modes, mode_count), alpha).group_velocity(mode_index, omega);
  });
}

gwloc_status gwloc_sample_alpha(uint64_t seed, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = dispersion::sample_alpha(seed);
  });
}

void gwloc_gen_config_default(gwloc_gen_config* config) {
  if (config == nullptr) return;
  const dataset::GenerationConfig d;
  *config = gwloc_gen_config{};
  config->samples = static_cast<uint32_t>(d.samples);
  config->bins = static_cast<uint32_t>(d.bins);
  config->f_max_hz = d.f_max_hz;
  config->sensors = static_cast<uint32_t>(d.sensors);
  config->plate_length = d.plate_length;
  config->plate_width = d.plate_width;
  config->modes = nullptr;
  config->mode_count = 0;
  config->alpha_fixed = 0;
  config->fixed_alpha = 1.0;
  config->snr_db = d.snr_db;
  config->train_fraction = d.train_fraction;
  config->per_sample_sensors = 0;
  config->window_enabled = 0;
  config->window_center_hz = d.window.center_hz;
  config->window_width_hz = d.window.width_hz;
  config->seed = 0;
  config->threads = 0;
}

void gwloc_gen_config_make_ideal(gwloc_gen_config* config) {
  if (config == nullptr) return;
  config->alpha_fixed = 1;
  config->fixed_alpha = 1.0;
  config->snr_db = INFINITY;
}

gwloc_status gwloc_dataset_generate(const gwloc_gen_config* config, gwloc_dataset** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    dataset::GenerationConfig c;
    c.samples = config->samples;
    c.bins = config->bins;
    c.f_max_hz = config->f_max_hz;
    c.sensors = config->sensors;
    c.plate_length = config->plate_length;
    c.plate_width = config->plate_width;
    c.modes = to_modes(config->modes, config->mode_count);
    c.alpha_mode = config->alpha_fixed ? dataset::AlphaMode::kFixed : dataset::AlphaMode::kTruncatedNormal;
    c.fixed_alpha = config->fixed_alpha;
    c.snr_db = config->snr_db;
    c.train_fraction = config->train_fraction;
    c.per_sample_sensors = config->per_sample_sensors != 0;
    c.window = {config->window_enabled != 0, config->window_center_hz, config->window_width_hz};
    c.seed = config->seed;
    c.threads = config->threads;
    auto handle = std::make_unique<gwloc_dataset>();
    handle->ds = dataset::generate(c);
    *out = handle.release();
  });
}

gwloc_status gwloc_dataset_load(const char* path, gwloc_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    const std::vector<std::uint8_t> bytes = container::read_file(path);
    auto handle = std::make_unique<gwloc_dataset>();
    handle->ds = dataset::deserialize(bytes);
    handle->hash = container::sha256_hex(bytes);
    *out = handle.release();
  });
}

gwloc_status gwloc_dataset_save(const gwloc_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    const std::vector<std::uint8_t> bytes = dataset::serialize(ds->ds);
    container::write_file(path, bytes);
    ds->hash = container::sha256_hex(bytes);
  });
}

void gwloc_dataset_free(gwloc_dataset* ds) { delete ds; }

gwloc_status gwloc_dataset_get_info(const gwloc_dataset* ds, gwloc_dataset_info* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    const auto& d = ds->ds;
    out->samples = static_cast<uint32_t>(d.samples.size());
    out->bins = static_cast<uint32_t>(d.bins());
    out->pairs = static_cast<uint32_t>(d.pair_count());
    out->sensors = static_cast<uint32_t>(d.sensors.size());
    out->train_count = static_cast<uint32_t>(d.train.size());
    out->test_count = static_cast<uint32_t>(d.test.size());
    out->f_max_hz = d.grid.f_max();
    out->seed = d.seed;
    out->standardized = d.standardized ? 1 : 0;
    out->has_clean = d.has_clean ? 1 : 0;
  });
}

gwloc_status gwloc_dataset_get_sample(const gwloc_dataset* ds, size_t index, gwloc_sample_info* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (index >= ds->ds.samples.size()) fail(ErrorCode::kIndex, "sample index " + std::to_string(index) + " out of range");
    const auto& s = ds->ds.samples[index];
    *out = {s.label.x, s.label.y, s.alpha, s.snr_db, s.seed};
  });
}

gwloc_status gwloc_dataset_copy_record(const gwloc_dataset* ds, size_t index, int clean, float* out,
                                       size_t capacity) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (index >= ds->ds.samples.size()) fail(ErrorCode::kIndex, "sample index " + std::to_string(index) + " out of range");
    if (clean && !ds->ds.has_clean) fail(ErrorCode::kFormat, "dataset carries no clean payload");
    const auto& record = clean ? ds->ds.samples[index].clean : ds->ds.samples[index].data;
    if (capacity < record.size()) fail(ErrorCode::kShape, "output buffer smaller than Q x M");
    std::copy(record.begin(), record.end(), out);
  });
}

gwloc_status gwloc_dataset_standardize(gwloc_dataset* ds) {
  return guarded([&] {
    require(ds, "dataset");
    ds->ds = dataset::standardize_fit_transform(std::move(ds->ds));
    ds->hash.clear();
  });
}

const char* gwloc_dataset_hash(const gwloc_dataset* ds) {
  if (ds == nullptr) return "";
  if (ds->hash.empty()) {
    try {
      ds->hash = container::sha256_hex(dataset::serialize(ds->ds));
    } catch (const std::exception& e) {
      g_last_error = e.what();
    }
  }
  return ds->hash.c_str();
}

void gwloc_train_config_default(gwloc_train_config* config) {
  if (config == nullptr) return;
  const neuralloc::MlpConfig d;
  *config = gwloc_train_config{};
  config->hidden = nullptr;
  config->hidden_count = 0;
  config->dropout = d.dropout;
  config->epochs = static_cast<uint32_t>(d.epochs);
  config->batch_size = static_cast<uint32_t>(d.batch_size);
  config->learning_rate = d.learning_rate;
  config->optimizer = GWLOC_OPT_ADAM;
  config->seed = 0;
}

gwloc_status gwloc_model_train(gwloc_dataset* ds, const gwloc_train_config* config, gwloc_epoch_callback on_epoch,
                               void* user, gwloc_model** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    neuralloc::MlpConfig c;
    if (config->hidden != nullptr) c.hidden.assign(config->hidden, config->hidden + config->hidden_count);
    c.dropout = config->dropout;
    c.epochs = config->epochs;
    c.batch_size = config->batch_size;
    c.learning_rate = config->learning_rate;
    switch (config->optimizer) {
      case GWLOC_OPT_ADAM: c.optimizer = neuralloc::Optimizer::kAdam; break;
      case GWLOC_OPT_SGD: c.optimizer = neuralloc::Optimizer::kSgd; break;
      default: fail(ErrorCode::kInvalidArgument, "unknown optimizer");
    }
    c.seed = config->seed;
    if (!ds->ds.standardized) {
      ds->ds = dataset::standardize_fit_transform(std::move(ds->ds));
      ds->hash.clear();
    }
    neuralloc::EpochCallback callback;
    if (on_epoch != nullptr) {
      callback = [&](std::size_t epoch, double loss) { on_epoch(static_cast<uint32_t>(epoch), loss, user); };
    }
    auto handle = std::make_unique<gwloc_model>();
    handle->model = std::make_shared<const neuralloc::MlpModel>(neuralloc::train(ds->ds, c, callback));
    *out = handle.release();
  });
}

gwloc_status gwloc_model_load(const char* path, gwloc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    const std::vector<std::uint8_t> bytes = container::read_file(path);
    auto handle = std::make_unique<gwloc_model>();
    handle->model = std::make_shared<const neuralloc::MlpModel>(neuralloc::deserialize(bytes));
    handle->hash = container::sha256_hex(bytes);
    *out = handle.release();
  });
}

gwloc_status gwloc_model_save(const gwloc_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    const std::vector<std::uint8_t> bytes = neuralloc::serialize(*model->model);
    container::write_file(path, bytes);
    model->hash = container::sha256_hex(bytes);
  });
}

void gwloc_model_free(gwloc_model* model) { delete model; }

size_t gwloc_model_input_dim(const gwloc_model* model) {
  return model == nullptr ? 0 : model->model->config.input_dim;
}

const char* gwloc_model_hash(const gwloc_model* model) {
  if (model == nullptr) return "";
  if (model->hash.empty()) {
    try {
      model->hash = container::sha256_hex(neuralloc::serialize(*model->model));
    } catch (const std::exception& e) {
      g_last_error = e.what();
    }
  }
  return model->hash.c_str();
}

gwloc_status gwloc_model_predict(const gwloc_model* model, const float* sample, size_t length, int standardized,
                                 double* x, double* y) {
  return guarded([&] {
    require(model, "model");
    require(sample, "sample");
    require(x, "x");
    require(y, "y");
    const wavefield::Point p = neuralloc::predict(*model->model, std::span(sample, length), standardized != 0);
    *x = p.x;
    *y = p.y;
  });
}

void gwloc_heatmap_config_default(gwloc_heatmap_config* config) {
  if (config == nullptr) return;
  *config = gwloc_heatmap_config{100, 100, 4, 0, 0};
}

gwloc_status gwloc_heatmap_compute(const gwloc_dataset* ds, size_t sample_index, const gwloc_heatmap_config* config,
                                   gwloc_heatmap** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const auto& d = ds->ds;
    if (sample_index >= d.samples.size()) {
      fail(ErrorCode::kIndex, "sample index " + std::to_string(sample_index) + " out of range (" +
                                  std::to_string(d.samples.size()) + " samples)");
    }
    if (!config->use_clean && d.standardized) {
      fail(ErrorCode::kInvalidArgument, "data records are standardized; score the clean record instead");
    }
    const wavefield::TimeMatrix observed = config->use_clean ? d.clean_matrix(sample_index) : d.data_matrix(sample_index);
    auto handle = std::make_unique<gwloc_heatmap>();
    handle->map = physloc::localize_grid(observed, d.layout_for(sample_index), d.grid,
                                         dispersion::DispersionModel(d.modes, 1.0), {config->nx, config->ny},
                                         {d.window, config->subsamples, config->threads});
    handle->truth = d.samples[sample_index].label;
    handle->sample_index = sample_index;
    handle->settings = {{"sample_index", sample_index},
                        {"subsamples", config->subsamples},
                        {"record", config->use_clean ? "clean" : "data"},
                        {"alpha", d.samples[sample_index].alpha},
                        {"snr_db", container::snr_to_json(d.samples[sample_index].snr_db)}};
    *out = handle.release();
  });
}

void gwloc_heatmap_free(gwloc_heatmap* map) { delete map; }

gwloc_status gwloc_heatmap_argmax(const gwloc_heatmap* map, double* x, double* y, double* score) {
  return guarded([&] {
    require(map, "heatmap");
    if (x) *x = map->map.argmax.x;
    if (y) *y = map->map.argmax.y;
    if (score) *score = map->map.max_score();
  });
}

gwloc_status gwloc_heatmap_truth(const gwloc_heatmap* map, double* x, double* y) {
  return guarded([&] {
    require(map, "heatmap");
    if (x) *x = map->truth.x;
    if (y) *y = map->truth.y;
  });
}

gwloc_status gwloc_heatmap_write(const gwloc_heatmap* map, const char* csv_path, const char* json_path,
                                 const char* run_config_json) {
  return guarded([&] {
    require(map, "heatmap");
    require(csv_path, "csv_path");
    nlohmann::json sidecar = physloc::to_json(map->map, map->truth);
    sidecar["settings"] = map->settings;
    sidecar["config"] = parse_run_config(run_config_json);
    container::write_text(csv_path, physloc::to_csv(map->map));
    if (json_path != nullptr) write_sidecar(json_path, sidecar);
  });
}

void gwloc_sweep_config_default(gwloc_sweep_config* config) {
  if (config == nullptr) return;
  static constexpr double kSnrs[] = {5.0, 10.0, 15.0, 20.0, 25.0};
  *config = gwloc_sweep_config{};
  config->snrs = kSnrs;
  config->snr_count = 5;
  config->split = "test";
  config->physical = 0;
  config->physical_nx = 50;
  config->physical_ny = 50;
  config->physical_subsamples = 4;
  config->seed = 0;
  config->threads = 0;
}

gwloc_status gwloc_eval_sweep(const gwloc_dataset* ds, const gwloc_sweep_config* config,
                              const gwloc_model* const* models, const char* const* model_ids, size_t model_count,
                              gwloc_report** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    if (config->snrs == nullptr || config->snr_count == 0) fail(ErrorCode::kInvalidArgument, "SNR list is empty");
    if (model_count > 0 && (models == nullptr || model_ids == nullptr)) {
      fail(ErrorCode::kInvalidArgument, "models or model_ids is NULL");
    }
    eval::SweepOptions options;
    options.snrs.assign(config->snrs, config->snrs + config->snr_count);
    options.split = eval::split_from_string(config->split ? config->split : "test");
    options.seed = config->seed;
    options.threads = config->threads;

    std::vector<std::unique_ptr<eval::Localizer>> owned;
    nlohmann::json model_hashes = nlohmann::json::object();
    for (size_t i = 0; i < model_count; ++i) {
      require(models[i], "model");
      require(model_ids[i], "model id");
      owned.push_back(std::make_unique<eval::DnnLocalizer>(model_ids[i], models[i]->model));
      model_hashes[model_ids[i]] = gwloc_model_hash(models[i]);
    }
    if (config->physical) {
      owned.push_back(std::make_unique<eval::PhysicalLocalizer>(
          physloc::Resolution{config->physical_nx, config->physical_ny}, config->physical_subsamples,
          config->threads));
    }
    std::vector<eval::Localizer*> methods;
    for (auto& m : owned) methods.push_back(m.get());

    auto handle = std::make_unique<gwloc_report>();
    handle->report = eval::sweep(ds->ds, options, methods);
    handle->report.provenance["dataset_sha256"] = gwloc_dataset_hash(ds);
    handle->report.provenance["model_sha256"] = model_hashes;
    if (config->physical) {
      handle->report.provenance["physical"] = {{"nx", config->physical_nx},
                                               {"ny", config->physical_ny},
                                               {"subsamples", config->physical_subsamples},
                                               {"alpha", 1.0}};
    }
    *out = handle.release();
  });
}

void gwloc_report_free(gwloc_report* report) { delete report; }

size_t gwloc_report_row_count(const gwloc_report* report) { return report == nullptr ? 0 : report->report.rows.size(); }

gwloc_status gwloc_report_get_row(const gwloc_report* report, size_t index, gwloc_report_row* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    if (index >= report->report.rows.size()) fail(ErrorCode::kIndex, "report row out of range");
    const auto& r = report->report.rows[index];
    *out = {r.method.c_str(), r.snr_db, r.ale_mean, r.ale_std, r.count};
  });
}

gwloc_status gwloc_report_write(const gwloc_report* report, const char* csv_path, const char* json_path,
                                const char* run_config_json) {
  return guarded([&] {
    require(report, "report");
    require(csv_path, "csv_path");
    nlohmann::json sidecar = eval::to_json(report->report);
    sidecar["config"] = parse_run_config(run_config_json);
    container::write_text(csv_path, eval::to_csv(report->report));
    if (json_path != nullptr) write_sidecar(json_path, sidecar);
  });
}

gwloc_status gwloc_ale(const double* truth_x, const double* truth_y, const double* pred_x, const double* pred_y,
                       size_t n, double* mean, double* stddev) {
  return guarded([&] {
    require(truth_x, "truth_x");
    require(truth_y, "truth_y");
    require(pred_x, "pred_x");
    require(pred_y, "pred_y");
    std::vector<eval::LabeledPrediction> pairs(n);
    for (size_t i = 0; i < n; ++i) pairs[i] = {{truth_x[i], truth_y[i]}, {pred_x[i], pred_y[i]}};
    const eval::AleStats stats = eval::ale(pairs);
    if (mean) *mean = stats.mean;
    if (stddev) *stddev = stats.stddev;
  });
}

}  // extern "C"
