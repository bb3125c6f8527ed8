#include "gwloc/physloc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "gwloc/error.hpp"
#include "gwloc/parallel.hpp"

namespace gwloc::physloc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool clear_of_sensors(const wavefield::PlateScene& layout, Point candidate) {
  for (const auto& s : layout.sensors) {
    if (wavefield::distance(s, candidate) < wavefield::kMinDistance) return false;
  }
  return true;
}

void check_resolution(Resolution r) {
  if (r.nx < 2 || r.ny < 2) fail(ErrorCode::kInvalidArgument, "heatmap resolution must be at least 2x2");
}

Point center_of(std::size_t ix, std::size_t iy, Resolution r, double length, double width) {
  return {(static_cast<double>(ix) + 0.5) * length / static_cast<double>(r.nx),
          (static_cast<double>(iy) + 0.5) * width / static_cast<double>(r.ny)};
}

}  // namespace

Point Heatmap::cell_center(std::size_t ix, std::size_t iy) const {
  return center_of(ix, iy, {nx, ny}, length, width);
}

double correlation_score(const wavefield::TimeMatrix& observed, Point candidate,
                         const wavefield::PlateScene& scene, const wavefield::TimeTransform& transform,
                         const dispersion::DispersionModel& model, const wavefield::ExcitationWindow& window) {
  const auto bins = static_cast<Eigen::Index>(transform.grid().bins());
  const auto pairs = static_cast<Eigen::Index>(scene.pair_count());
  if (observed.values.rows() != bins || observed.values.cols() != pairs) {
    fail(ErrorCode::kShape, "observed matrix does not match Q x M");
  }
  if (!scene.contains(candidate)) fail(ErrorCode::kGeometry, "candidate lies outside the plate");
  if (!clear_of_sensors(scene, candidate)) return kNegInf;

  wavefield::PlateScene probe = scene;
  probe.damage = candidate;
  const wavefield::TimeMatrix predicted = wavefield::synthesize_time(probe, transform, model.with_alpha(1.0), window);

  double score = 0.0;
  for (Eigen::Index c = 0; c < pairs; ++c) {
    const auto obs = observed.values.col(c);
    const auto mod = predicted.values.col(c);
    const double norm = obs.norm() * mod.norm();
    if (norm > 0.0) score += std::abs(obs.dot(mod)) / norm;
  }
  return score;
}

double correlation_score(const wavefield::TimeMatrix& observed, Point candidate,
                         const wavefield::PlateScene& scene, const wavefield::FrequencyGrid& grid,
                         const dispersion::DispersionModel& model) {
  return correlation_score(observed, candidate, scene, wavefield::TimeTransform(grid), model);
}

ModelBank::ModelBank(const wavefield::PlateScene& layout, const wavefield::FrequencyGrid& grid,
                     const dispersion::DispersionModel& model, Resolution resolution, const BankOptions& options)
    : layout_(layout), bins_(grid.bins()), resolution_(resolution) {
  check_resolution(resolution);
  if (options.subsamples < 1) fail(ErrorCode::kInvalidArgument, "cell subsample count must be at least 1");
  const std::size_t cells = resolution.nx * resolution.ny;
  const auto bins = static_cast<Eigen::Index>(bins_);
  const std::size_t pairs = layout.pair_count();
  const std::size_t k = options.subsamples;
  valid_.assign(cells, 0);
  columns_.assign(pairs, FloatRows::Zero(static_cast<Eigen::Index>(cells), bins));

  const wavefield::TimeTransform transform(grid);
  const dispersion::DispersionModel nominal = model.with_alpha(1.0);
  const double cell_w = layout.length / static_cast<double>(resolution.nx);
  const double cell_h = layout.width / static_cast<double>(resolution.ny);
  parallel_for(cells, options.threads, [&](std::size_t cell) {
    const std::size_t ix = cell % resolution.nx;
    const std::size_t iy = cell / resolution.nx;
    if (!clear_of_sensors(layout_, center_of(ix, iy, resolution, layout.length, layout.width))) return;

    wavefield::PlateScene probe = layout_;
    wavefield::SpectrumMatrix spectrum =
        wavefield::SpectrumMatrix::Zero(bins, static_cast<Eigen::Index>(pairs));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        probe.damage = {(static_cast<double>(ix) + (static_cast<double>(a) + 0.5) / static_cast<double>(k)) * cell_w,
                        (static_cast<double>(iy) + (static_cast<double>(b) + 0.5) / static_cast<double>(k)) * cell_h};
        if (!clear_of_sensors(layout_, probe.damage)) continue;
        spectrum += wavefield::synthesize_spectrum(probe, grid, nominal, options.window);
      }
    }
    const wavefield::TimeMatrix predicted = transform.apply(spectrum);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto col = predicted.values.col(static_cast<Eigen::Index>(p));
      const double norm = col.norm();
      if (norm > 0.0) {
        columns_[p].row(static_cast<Eigen::Index>(cell)) = (col / norm).cast<float>().transpose();
      }
    }
    valid_[cell] = 1;
  });
}

Heatmap ModelBank::score(const wavefield::TimeMatrix& observed) const {
  const auto bins = static_cast<Eigen::Index>(bins_);
  const auto pairs = static_cast<Eigen::Index>(layout_.pair_count());
  if (observed.values.rows() != bins || observed.values.cols() != pairs) {
    fail(ErrorCode::kShape, "observed matrix does not match Q x M");
  }
  const std::size_t cells = valid_.size();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const auto obs = observed.values.col(p);
    const double norm = obs.norm();
    if (!(norm > 0.0)) continue;
    const Eigen::VectorXf unit = (obs / norm).cast<float>();
    const Eigen::VectorXf corr = columns_[static_cast<std::size_t>(p)] * unit;
    // Float rounding can push |corr| a hair past 1.
    total += corr.cast<double>().cwiseAbs().cwiseMin(1.0);
  }

  Heatmap map;
  map.nx = resolution_.nx;
  map.ny = resolution_.ny;
  map.length = layout_.length;
  map.width = layout_.width;
  map.scores.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) map.scores[c] = valid_[c] ? total[static_cast<Eigen::Index>(c)] : kNegInf;
  map.argmax_index = static_cast<std::size_t>(std::max_element(map.scores.begin(), map.scores.end()) - map.scores.begin());
  map.argmax = map.cell_center(map.argmax_index % map.nx, map.argmax_index / map.nx);
  return map;
}

Heatmap localize_grid(const wavefield::TimeMatrix& observed, const wavefield::PlateScene& scene,
                      const wavefield::FrequencyGrid& grid, const dispersion::DispersionModel& model,
                      Resolution resolution, const BankOptions& options) {
  return ModelBank(scene, grid, model, resolution, options).score(observed);
}

namespace {

std::string format_score(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string to_csv(const Heatmap& map) {
  std::string out;
  for (std::size_t iy = 0; iy < map.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.nx; ++ix) {
      if (ix) out += ',';
      out += format_score(map.scores[iy * map.nx + ix]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Heatmap& map, std::optional<Point> truth) {
  nlohmann::json j = {
      {"nx", map.nx},
      {"ny", map.ny},
      {"plate", {{"length", map.length}, {"width", map.width}}},
      {"cell", {{"width", map.cell_width()}, {"height", map.cell_height()}}},
      {"cell_center", "x = (ix + 0.5) * cell.width, y = (iy + 0.5) * cell.height; CSV row iy, column ix"},
      {"argmax",
       {{"ix", map.argmax_index % map.nx},
        {"iy", map.argmax_index / map.nx},
        {"x", map.argmax.x},
        {"y", map.argmax.y},
        {"score", map.max_score()}}},
  };
  if (truth) {
    j["truth"] = {{"x", truth->x}, {"y", truth->y}};
    j["error_m"] = wavefield::distance(*truth, map.argmax);
  }
  return j;
}

}  // namespace gwloc::physloc
