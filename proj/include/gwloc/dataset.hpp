#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwloc/dispersion.hpp"
#include "gwloc/wavefield.hpp"

namespace gwloc::dataset {

using wavefield::Point;

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();
inline constexpr int kMaxDamageDraws = 1000;

enum class AlphaMode { kTruncatedNormal, kFixed };

struct GenerationConfig {
  std::size_t samples = 500;
  std::size_t bins = 250;
  double f_max_hz = 1e6;
  std::size_t sensors = 8;
  double plate_length = 1.0;
  double plate_width = 1.0;
  std::vector<dispersion::ModeCurve> modes = dispersion::DispersionModel().modes();
  AlphaMode alpha_mode = AlphaMode::kTruncatedNormal;
  double fixed_alpha = 1.0;
  // +inf disables noise.
  double snr_db = 25.0;
  double train_fraction = 0.8;
  bool per_sample_sensors = false;
  wavefield::ExcitationWindow window;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  // alpha = 1 and no noise.
  static GenerationConfig ideal(GenerationConfig base);
  void validate() const;
};

// Per-feature z-scoring statistics over q-major flattened records.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kStdFloor = 1e-12;
  std::size_t size() const { return mean.size(); }
  double transform(std::size_t feature, double value) const {
    return (value - mean[feature]) / stddev[feature];
  }
};

// One simulation. Payloads are stored as 32-bit floats (the on-disk
// precision); the q-major flat layout matches wavefield::TimeMatrix storage.
struct WaveSample {
  std::vector<float> data;
  std::vector<float> clean;
  Point label;
  double alpha = 1.0;
  double snr_db = kNoNoise;
  std::uint64_t seed = 0;
  // Present only when sensors are redrawn per sample.
  std::optional<std::vector<Point>> sensors;
};

struct WaveDataset {
  wavefield::FrequencyGrid grid{250, 1e6};
  double plate_length = 1.0;
  double plate_width = 1.0;
  std::vector<Point> sensors;
  std::vector<wavefield::SensorPair> pairs;
  std::vector<dispersion::ModeCurve> modes;
  wavefield::ExcitationWindow window;
  std::vector<WaveSample> samples;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::optional<Standardization> standardization;
  // True once `data` payloads hold standardized values.
  bool standardized = false;
  bool has_clean = true;
  std::uint64_t seed = 0;
  GenerationConfig config;

  std::size_t bins() const { return grid.bins(); }
  std::size_t pair_count() const { return pairs.size(); }
  std::size_t feature_count() const { return grid.bins() * pairs.size(); }
  const std::vector<Point>& sensors_for(std::size_t sample_index) const;
  wavefield::PlateScene scene_for(std::size_t sample_index) const;
  // Scene with the sample's sensors and a placeholder damage location.
  wavefield::PlateScene layout_for(std::size_t sample_index) const;
  wavefield::TimeMatrix data_matrix(std::size_t sample_index) const;
  wavefield::TimeMatrix clean_matrix(std::size_t sample_index) const;
  void validate() const;
};

wavefield::PlateScene random_scene(double length, double width, std::size_t sensor_count,
                                   std::uint64_t rng_seed);

// Uniform damage location at least kMinDistance from every sensor.
Point random_damage(const wavefield::PlateScene& layout, std::uint64_t rng_seed);

// Adds Gaussian noise of power P_s / 10^(snr/10), P_s being the mean square of
// all entries. The drawn realization is rescaled so its mean square equals the
// target exactly. snr_db = +inf returns the input unchanged.
wavefield::TimeMatrix add_awgn(const wavefield::TimeMatrix& data, double snr_db, std::uint64_t rng_seed);

double signal_power(std::span<const double> values);
double realized_snr_db(std::span<const double> clean, std::span<const double> noisy);

WaveDataset generate(const GenerationConfig& config);

Standardization fit_standardization(const WaveDataset& ds);
WaveDataset standardize_fit_transform(WaveDataset ds);

wavefield::TimeMatrix to_matrix(std::span<const float> flat, std::size_t bins, std::size_t pairs, double dt);
std::vector<float> to_floats(const wavefield::TimeMatrix& m);

}  // namespace gwloc::dataset
