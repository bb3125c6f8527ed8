#include "gwloc/wavefield.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gwloc/error.hpp"

namespace gwloc::wavefield {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<SensorPair> all_ordered_pairs(std::size_t sensor_count) {
  std::vector<SensorPair> pairs;
  pairs.reserve(sensor_count * (sensor_count > 0 ? sensor_count - 1 : 0));
  for (std::size_t tx = 0; tx < sensor_count; ++tx) {
    for (std::size_t rx = 0; rx < sensor_count; ++rx) {
      if (tx != rx) pairs.push_back({tx, rx});
    }
  }
  return pairs;
}

bool PlateScene::contains(Point p) const {
  return p.x >= 0.0 && p.x <= length && p.y >= 0.0 && p.y <= width;
}

double PlateScene::damage_clearance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sensors) best = std::min(best, distance(s, damage));
  return best;
}

void validate_scene(const PlateScene& scene) {
  if (!(scene.length > 0.0) || !(scene.width > 0.0)) {
    fail(ErrorCode::kGeometry, "plate dimensions must be positive");
  }
  for (std::size_t i = 0; i < scene.sensors.size(); ++i) {
    if (!scene.contains(scene.sensors[i])) {
      fail(ErrorCode::kGeometry, "sensor " + std::to_string(i) + " lies outside the plate");
    }
  }
  if (!scene.contains(scene.damage)) fail(ErrorCode::kGeometry, "damage lies outside the plate");
  for (const auto& p : scene.pairs) {
    if (p.tx >= scene.sensors.size() || p.rx >= scene.sensors.size() || p.tx == p.rx) {
      fail(ErrorCode::kGeometry, "malformed transducer pair (" + std::to_string(p.tx) + ", " +
                                     std::to_string(p.rx) + ")");
    }
  }
}

FrequencyGrid::FrequencyGrid(std::size_t bins, double f_max_hz) : bins_(bins), f_max_(f_max_hz) {
  if (bins_ < 2) fail(ErrorCode::kInvalidArgument, "frequency grid needs at least 2 bins");
  if (!(f_max_ > 0.0) || !std::isfinite(f_max_)) {
    fail(ErrorCode::kInvalidArgument, "f_max must be positive and finite");
  }
}

double FrequencyGrid::omega(std::size_t q) const { return 2.0 * std::numbers::pi * frequency(q); }

double ExcitationWindow::gain(double f_hz) const {
  if (!enabled) return 1.0;
  const double z = (f_hz - center_hz) / width_hz;
  return std::exp(-0.5 * z * z);
}

double scatter_path_length(const PlateScene& scene, std::size_t pair_index) {
  if (pair_index >= scene.pairs.size()) {
    fail(ErrorCode::kIndex, "pair index " + std::to_string(pair_index) + " out of range");
  }
  const SensorPair& p = scene.pairs[pair_index];
  if (p.tx >= scene.sensors.size() || p.rx >= scene.sensors.size()) {
    fail(ErrorCode::kIndex, "pair references a missing sensor");
  }
  return distance(scene.sensors[p.tx], scene.damage) + distance(scene.damage, scene.sensors[p.rx]);
}

SpectrumMatrix synthesize_spectrum(const PlateScene& scene, const FrequencyGrid& grid,
                                   const dispersion::DispersionModel& model,
                                   const ExcitationWindow& window) {
  const std::size_t bins = grid.bins();
  const std::size_t pairs = scene.pair_count();
  const std::size_t modes = model.mode_count();

  std::vector<double> kappa(bins * modes);
  std::vector<double> gain(bins);
  for (std::size_t q = 1; q < bins; ++q) {
    gain[q] = window.gain(grid.frequency(q));
    for (std::size_t n = 0; n < modes; ++n) kappa[q * modes + n] = model.wavenumber(n, grid.omega(q));
  }

  SpectrumMatrix spectrum = SpectrumMatrix::Zero(static_cast<Eigen::Index>(bins),
                                                 static_cast<Eigen::Index>(pairs));
  for (std::size_t c = 0; c < pairs; ++c) {
    const double r = scatter_path_length(scene, c);
    if (r < kMinDistance) {
      fail(ErrorCode::kGeometry, "scatter path of pair " + std::to_string(c) + " is " +
                                     std::to_string(r) + " m, below the 0.01 m guard");
    }
    for (std::size_t q = 1; q < bins; ++q) {
      std::complex<double> sum = 0.0;
      for (std::size_t n = 0; n < modes; ++n) {
        const double kr = kappa[q * modes + n] * r;
        sum += std::polar(std::sqrt(1.0 / kr), -kr);
      }
      spectrum(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) = gain[q] * sum;
    }
  }
  return spectrum;
}

TimeTransform::TimeTransform(const FrequencyGrid& grid) : grid_(grid) {
  const std::size_t bins = grid.bins();
  const auto n = static_cast<Eigen::Index>(bins);
  cos_.resize(n, n);
  sin_.resize(n, n);
  const std::size_t period = 2 * bins;
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t q = 0; q < bins; ++q) {
      // Reduce the phase index exactly before converting to radians.
      const double angle = std::numbers::pi * static_cast<double>((q * i) % period) / static_cast<double>(bins);
      cos_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = std::cos(angle);
      sin_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = std::sin(angle);
    }
  }
}

TimeMatrix TimeTransform::apply(const SpectrumMatrix& spectrum) const {
  if (spectrum.rows() != static_cast<Eigen::Index>(grid_.bins())) {
    fail(ErrorCode::kShape, "spectrum has " + std::to_string(spectrum.rows()) + " rows, grid has " +
                                std::to_string(grid_.bins()) + " bins");
  }
  const RowMatrix re = spectrum.real();
  const RowMatrix im = spectrum.imag();
  TimeMatrix out;
  out.values = (cos_ * re - sin_ * im) / static_cast<double>(grid_.bins());
  out.dt = grid_.dt();
  return out;
}

TimeMatrix to_time_domain(const SpectrumMatrix& spectrum, const FrequencyGrid& grid) {
  return TimeTransform(grid).apply(spectrum);
}

TimeMatrix synthesize_time(const PlateScene& scene, const TimeTransform& transform,
                           const dispersion::DispersionModel& model, const ExcitationWindow& window) {
  return transform.apply(synthesize_spectrum(scene, transform.grid(), model, window));
}

}  // namespace gwloc::wavefield
