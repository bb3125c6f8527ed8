#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gwloc/dispersion.hpp"

namespace gwloc::wavefield {

// Minimum tx->damage->rx path length accepted by the synthesizer, and the
// minimum damage-to-sensor clearance enforced by scene generation.
inline constexpr double kMinDistance = 0.01;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct SensorPair {
  std::size_t tx = 0;
  std::size_t rx = 0;

  friend bool operator==(const SensorPair&, const SensorPair&) = default;
};

// All m(m-1) ordered pairs, tx-major: (0,1), (0,2), ..., (1,0), (1,2), ...
std::vector<SensorPair> all_ordered_pairs(std::size_t sensor_count);

struct PlateScene {
  double length = 1.0;
  double width = 1.0;
  std::vector<Point> sensors;
  std::vector<SensorPair> pairs;
  Point damage;

  std::size_t pair_count() const { return pairs.size(); }
  bool contains(Point p) const;
  // Smallest damage-to-sensor distance.
  double damage_clearance() const;
};

// Throws kGeometry if any coordinate lies off the plate or a pair is malformed.
void validate_scene(const PlateScene& scene);

class FrequencyGrid {
 public:
  FrequencyGrid(std::size_t bins, double f_max_hz);

  std::size_t bins() const { return bins_; }
  double f_max() const { return f_max_; }
  double frequency(std::size_t q) const { return static_cast<double>(q) * f_max_ / static_cast<double>(bins_); }
  double omega(std::size_t q) const;
  // Sample spacing of the time records: 1 / (2 f_max).
  double dt() const { return 0.5 / f_max_; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::size_t bins_;
  double f_max_;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexRowMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Q rows (frequency bins) x M columns (pairs). Row 0 is DC and always zero.
using SpectrumMatrix = ComplexRowMatrix;

// Q rows (time samples) x M columns (pairs), row-major so the flat storage is
// the q-major feature vector (index = q * M + pair).
struct TimeMatrix {
  RowMatrix values;
  double dt = 0.0;
};

// Optional Gaussian band-pass multiplying the spectrum; off by default.
struct ExcitationWindow {
  bool enabled = false;
  double center_hz = 250e3;
  double width_hz = 100e3;

  double gain(double f_hz) const;
};

double scatter_path_length(const PlateScene& scene, std::size_t pair_index);

SpectrumMatrix synthesize_spectrum(const PlateScene& scene, const FrequencyGrid& grid,
                                   const dispersion::DispersionModel& model,
                                   const ExcitationWindow& window = {});

// Real part of the one-sided inverse transform, truncated to Q samples:
// x[i] = (1/Q) sum_q Re(X_q exp(+j 2 pi q i / (2Q))). The cos/sin tables are
// built once per bin count, so reuse one instance across many spectra.
class TimeTransform {
 public:
  explicit TimeTransform(const FrequencyGrid& grid);

  const FrequencyGrid& grid() const { return grid_; }
  TimeMatrix apply(const SpectrumMatrix& spectrum) const;

 private:
  FrequencyGrid grid_;
  RowMatrix cos_;
  RowMatrix sin_;
};

TimeMatrix to_time_domain(const SpectrumMatrix& spectrum, const FrequencyGrid& grid);

// synthesize_spectrum followed by transform.apply.
TimeMatrix synthesize_time(const PlateScene& scene, const TimeTransform& transform,
                           const dispersion::DispersionModel& model,
                           const ExcitationWindow& window = {});

}  // namespace gwloc::wavefield
