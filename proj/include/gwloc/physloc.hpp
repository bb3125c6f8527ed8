#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "gwloc/dispersion.hpp"
#include "gwloc/wavefield.hpp"

namespace gwloc::physloc {

using wavefield::Point;

struct Resolution {
  std::size_t nx = 50;
  std::size_t ny = 50;
};

// Scores over cell centers; scores[iy * nx + ix], so each row is one y-line.
// Cells too close to a sensor hold -inf.
struct Heatmap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double length = 1.0;
  double width = 1.0;
  std::vector<double> scores;
  std::size_t argmax_index = 0;
  Point argmax;

  double cell_width() const { return length / static_cast<double>(nx); }
  double cell_height() const { return width / static_cast<double>(ny); }
  Point cell_center(std::size_t ix, std::size_t iy) const;
  double max_score() const { return scores[argmax_index]; }
};

// Sum over pairs of |<obs, model>| / (|obs| |model|) against the alpha = 1
// prediction for a damage at `candidate`. Zero-norm columns contribute 0;
// a candidate closer than kMinDistance to a sensor scores -inf.
double correlation_score(const wavefield::TimeMatrix& observed, Point candidate,
                         const wavefield::PlateScene& scene, const wavefield::TimeTransform& transform,
                         const dispersion::DispersionModel& model,
                         const wavefield::ExcitationWindow& window = {});

double correlation_score(const wavefield::TimeMatrix& observed, Point candidate,
                         const wavefield::PlateScene& scene, const wavefield::FrequencyGrid& grid,
                         const dispersion::DispersionModel& model);

struct BankOptions {
  wavefield::ExcitationWindow window;
  // Each cell's template is the mean model spectrum over subsamples x
  // subsamples points spread evenly inside the cell; 1 uses the center only.
  std::size_t subsamples = 4;
  unsigned threads = 0;
};

// Precomputed unit-norm model columns for every cell of one sensor layout.
// Immutable once built; score() is safe to call concurrently.
class ModelBank {
 public:
  ModelBank(const wavefield::PlateScene& layout, const wavefield::FrequencyGrid& grid,
            const dispersion::DispersionModel& model, Resolution resolution, const BankOptions& options = {});

  Heatmap score(const wavefield::TimeMatrix& observed) const;
  const wavefield::PlateScene& layout() const { return layout_; }
  Resolution resolution() const { return resolution_; }

 private:
  using FloatRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  wavefield::PlateScene layout_;
  std::size_t bins_;
  Resolution resolution_;
  std::vector<char> valid_;
  // One (cells x Q) block per pair.
  std::vector<FloatRows> columns_;
};

Heatmap localize_grid(const wavefield::TimeMatrix& observed, const wavefield::PlateScene& scene,
                      const wavefield::FrequencyGrid& grid, const dispersion::DispersionModel& model,
                      Resolution resolution, const BankOptions& options = {});

// nx x ny scores, one CSV row per y-line; skipped cells are written as -inf.
std::string to_csv(const Heatmap& map);
// Cell geometry, argmax and (when known) the true damage location.
nlohmann::json to_json(const Heatmap& map, std::optional<Point> truth = std::nullopt);

}  // namespace gwloc::physloc
