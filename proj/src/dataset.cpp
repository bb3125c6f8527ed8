#include "gwloc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gwloc/error.hpp"
#include "gwloc/parallel.hpp"
#include "gwloc/rng.hpp"

namespace gwloc::dataset {

namespace {

// Child-seed streams. Sample seeds use stream index + 1, so these sit far
// above any realistic sample count.
constexpr std::uint64_t kLayoutStream = 0x4c41594f55540000ULL;
constexpr std::uint64_t kSplitStream = 0x53504c4954000000ULL;
constexpr std::uint64_t kSensorSubstream = 1;
constexpr std::uint64_t kDamageSubstream = 2;
constexpr std::uint64_t kAlphaSubstream = 3;
constexpr std::uint64_t kNoiseSubstream = 4;

std::vector<Point> random_sensors(double length, double width, std::size_t count, Rng& rng) {
  std::vector<Point> sensors(count);
  for (auto& s : sensors) {
    s.x = rng.uniform(0.0, length);
    s.y = rng.uniform(0.0, width);
  }
  return sensors;
}

wavefield::PlateScene layout_scene(double length, double width, std::vector<Point> sensors) {
  wavefield::PlateScene scene;
  scene.length = length;
  scene.width = width;
  scene.pairs = wavefield::all_ordered_pairs(sensors.size());
  scene.sensors = std::move(sensors);
  return scene;
}

}  // namespace

GenerationConfig GenerationConfig::ideal(GenerationConfig base) {
  base.alpha_mode = AlphaMode::kFixed;
  base.fixed_alpha = 1.0;
  base.snr_db = kNoNoise;
  return base;
}

void GenerationConfig::validate() const {
  if (samples < 1) fail(ErrorCode::kInvalidArgument, "sample count must be at least 1");
  if (bins < 2) fail(ErrorCode::kInvalidArgument, "bin count must be at least 2");
  if (sensors < 2) fail(ErrorCode::kInvalidArgument, "sensor count must be at least 2");
  if (!(f_max_hz > 0.0)) fail(ErrorCode::kInvalidArgument, "f_max must be positive");
  if (!(plate_length > 0.0) || !(plate_width > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "plate dimensions must be positive");
  }
  if (modes.empty()) fail(ErrorCode::kInvalidArgument, "at least one dispersion mode is required");
  for (const auto& m : modes) dispersion::validate(m);
  if (alpha_mode == AlphaMode::kFixed &&
      !(fixed_alpha >= dispersion::kAlphaMin && fixed_alpha <= dispersion::kAlphaMax)) {
    fail(ErrorCode::kInvalidArgument, "fixed alpha must lie in [0.7, 1.3]");
  }
  if (std::isnan(snr_db) || snr_db == -kNoNoise) fail(ErrorCode::kInvalidArgument, "SNR must be finite or +inf");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "train fraction must lie in (0, 1]");
  }
  if (window.enabled && !(window.width_hz > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "excitation window width must be positive");
  }
}

const std::vector<Point>& WaveDataset::sensors_for(std::size_t sample_index) const {
  if (sample_index >= samples.size()) {
    fail(ErrorCode::kIndex, "sample index " + std::to_string(sample_index) + " out of range (" +
                                std::to_string(samples.size()) + " samples)");
  }
  const auto& own = samples[sample_index].sensors;
  return own ? *own : sensors;
}

wavefield::PlateScene WaveDataset::layout_for(std::size_t sample_index) const {
  wavefield::PlateScene scene;
  scene.length = plate_length;
  scene.width = plate_width;
  scene.sensors = sensors_for(sample_index);
  scene.pairs = pairs;
  return scene;
}

wavefield::PlateScene WaveDataset::scene_for(std::size_t sample_index) const {
  wavefield::PlateScene scene = layout_for(sample_index);
  scene.damage = samples[sample_index].label;
  return scene;
}

wavefield::TimeMatrix WaveDataset::data_matrix(std::size_t sample_index) const {
  if (sample_index >= samples.size()) fail(ErrorCode::kIndex, "sample index out of range");
  return to_matrix(samples[sample_index].data, bins(), pair_count(), grid.dt());
}

wavefield::TimeMatrix WaveDataset::clean_matrix(std::size_t sample_index) const {
  if (sample_index >= samples.size()) fail(ErrorCode::kIndex, "sample index out of range");
  if (!has_clean) fail(ErrorCode::kFormat, "dataset carries no clean payload");
  return to_matrix(samples[sample_index].clean, bins(), pair_count(), grid.dt());
}

void WaveDataset::validate() const {
  const std::size_t features = feature_count();
  std::vector<char> seen(samples.size(), 0);
  for (const auto* split : {&train, &test}) {
    for (std::size_t i : *split) {
      if (i >= samples.size() || seen[i]) fail(ErrorCode::kSplit, "split indices overlap or exceed the sample count");
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    fail(ErrorCode::kSplit, "train and test splits do not cover every sample");
  }
  for (const auto& s : samples) {
    if (s.data.size() != features || (has_clean && s.clean.size() != features)) {
      fail(ErrorCode::kShape, "sample payload does not match Q x M");
    }
    if (s.sensors && s.sensors->size() != sensors.size()) {
      fail(ErrorCode::kShape, "per-sample sensor list has the wrong length");
    }
  }
  if (standardization && standardization->size() != features) {
    fail(ErrorCode::kShape, "standardization vectors do not match Q x M");
  }
}

wavefield::PlateScene random_scene(double length, double width, std::size_t sensor_count,
                                   std::uint64_t rng_seed) {
  if (sensor_count < 2) fail(ErrorCode::kInvalidArgument, "a scene needs at least 2 sensors");
  Rng rng(derive_seed(rng_seed, kSensorSubstream));
  wavefield::PlateScene scene = layout_scene(length, width, random_sensors(length, width, sensor_count, rng));
  scene.damage = random_damage(scene, derive_seed(rng_seed, kDamageSubstream));
  return scene;
}

Point random_damage(const wavefield::PlateScene& layout, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  wavefield::PlateScene probe = layout;
  for (int attempt = 0; attempt < kMaxDamageDraws; ++attempt) {
    probe.damage = {rng.uniform(0.0, layout.length), rng.uniform(0.0, layout.width)};
    if (probe.damage_clearance() >= wavefield::kMinDistance) return probe.damage;
  }
  fail(ErrorCode::kGeometry, "no damage location clear of the sensors after 1000 draws");
}

double signal_power(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return sum / static_cast<double>(values.size());
}

double realized_snr_db(std::span<const double> clean, std::span<const double> noisy) {
  if (clean.size() != noisy.size()) fail(ErrorCode::kShape, "clean and noisy sizes differ");
  double noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = noisy[i] - clean[i];
    noise += d * d;
  }
  noise /= static_cast<double>(clean.size());
  return 10.0 * std::log10(signal_power(clean) / noise);
}

wavefield::TimeMatrix add_awgn(const wavefield::TimeMatrix& data, double snr_db, std::uint64_t rng_seed) {
  if (snr_db == kNoNoise) return data;
  if (!std::isfinite(snr_db)) fail(ErrorCode::kInvalidArgument, "SNR must be finite or +inf");
  const std::span<const double> flat(data.values.data(), static_cast<std::size_t>(data.values.size()));
  const double power = signal_power(flat);
  if (!(power > 0.0)) fail(ErrorCode::kDegenerateSignal, "cannot calibrate noise against an all-zero signal");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(rng_seed);
  Eigen::ArrayXd noise(data.values.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.gaussian();
  const double drawn = noise.square().mean();
  const double scale = drawn > 0.0 ? sigma / std::sqrt(drawn) : sigma;
  wavefield::TimeMatrix out = data;
  double* values = out.values.data();
  for (Eigen::Index i = 0; i < noise.size(); ++i) values[i] += scale * noise[i];
  return out;
}

wavefield::TimeMatrix to_matrix(std::span<const float> flat, std::size_t bins, std::size_t pairs, double dt) {
  if (flat.size() != bins * pairs) fail(ErrorCode::kShape, "flat record does not match Q x M");
  wavefield::TimeMatrix m;
  m.values.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(pairs));
  std::copy(flat.begin(), flat.end(), m.values.data());
  m.dt = dt;
  return m;
}

std::vector<float> to_floats(const wavefield::TimeMatrix& m) {
  std::vector<float> out(static_cast<std::size_t>(m.values.size()));
  std::transform(m.values.data(), m.values.data() + m.values.size(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

WaveDataset generate(const GenerationConfig& config) {
  config.validate();
  WaveDataset ds;
  ds.grid = wavefield::FrequencyGrid(config.bins, config.f_max_hz);
  ds.plate_length = config.plate_length;
  ds.plate_width = config.plate_width;
  ds.modes = config.modes;
  ds.window = config.window;
  ds.seed = config.seed;
  ds.config = config;

  {
    Rng rng(derive_seed(config.seed, kLayoutStream));
    ds.sensors = random_sensors(config.plate_length, config.plate_width, config.sensors, rng);
  }
  ds.pairs = wavefield::all_ordered_pairs(config.sensors);

  const dispersion::DispersionModel nominal(config.modes, 1.0);
  const wavefield::TimeTransform transform(ds.grid);
  ds.samples.resize(config.samples);

  parallel_for(config.samples, config.threads, [&](std::size_t i) {
    try {
      WaveSample& sample = ds.samples[i];
      sample.seed = derive_seed(config.seed, i + 1);
      wavefield::PlateScene scene = layout_scene(config.plate_length, config.plate_width, ds.sensors);
      if (config.per_sample_sensors) {
        Rng rng(derive_seed(sample.seed, kSensorSubstream));
        scene.sensors = random_sensors(config.plate_length, config.plate_width, config.sensors, rng);
        sample.sensors = scene.sensors;
      }
      scene.damage = random_damage(scene, derive_seed(sample.seed, kDamageSubstream));
      sample.label = scene.damage;
      sample.alpha = config.alpha_mode == AlphaMode::kFixed
                         ? config.fixed_alpha
                         : dispersion::sample_alpha(derive_seed(sample.seed, kAlphaSubstream));
      sample.snr_db = config.snr_db;

      const wavefield::TimeMatrix clean =
          wavefield::synthesize_time(scene, transform, nominal.with_alpha(sample.alpha), config.window);
      sample.clean = to_floats(clean);
      sample.data = config.snr_db == kNoNoise
                        ? sample.clean
                        : to_floats(add_awgn(clean, config.snr_db, derive_seed(sample.seed, kNoiseSubstream)));
    } catch (const Error& e) {
      throw Error(e.code(), "sample " + std::to_string(i) + ": " + e.what());
    }
  });

  std::vector<std::size_t> order(config.samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(config.seed, kSplitStream));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.below(i)]);
  }
  const auto train_count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(config.samples))),
      1, config.samples);
  ds.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  ds.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.test.begin(), ds.test.end());
  return ds;
}

Standardization fit_standardization(const WaveDataset& ds) {
  if (ds.train.empty()) fail(ErrorCode::kSplit, "cannot fit standardization on an empty train split");
  const std::size_t features = ds.feature_count();
  Standardization stats;
  stats.mean.assign(features, 0.0);
  stats.stddev.assign(features, 0.0);
  const double count = static_cast<double>(ds.train.size());
  for (std::size_t i : ds.train) {
    const auto& data = ds.samples[i].data;
    for (std::size_t j = 0; j < features; ++j) stats.mean[j] += data[j];
  }
  for (double& m : stats.mean) m /= count;
  // Two-pass variance for accuracy.
  for (std::size_t i : ds.train) {
    const auto& data = ds.samples[i].data;
    for (std::size_t j = 0; j < features; ++j) {
      const double d = data[j] - stats.mean[j];
      stats.stddev[j] += d * d;
    }
  }
  for (double& s : stats.stddev) s = std::max(std::sqrt(s / count), Standardization::kStdFloor);
  return stats;
}

WaveDataset standardize_fit_transform(WaveDataset ds) {
  if (ds.standardized) fail(ErrorCode::kInvalidArgument, "dataset is already standardized");
  Standardization stats = fit_standardization(ds);
  for (auto& sample : ds.samples) {
    for (std::size_t j = 0; j < sample.data.size(); ++j) {
      sample.data[j] = static_cast<float>(stats.transform(j, sample.data[j]));
    }
  }
  ds.standardization = std::move(stats);
  ds.standardized = true;
  return ds;
}

}  // namespace gwloc::dataset
