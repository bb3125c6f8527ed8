#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwloc/dataset.hpp"
#include "gwloc/mlp.hpp"
#include "gwloc/physloc.hpp"

namespace gwloc::eval {

using wavefield::Point;

struct LabeledPrediction {
  Point truth;
  Point predicted;
};

// Mean and population standard deviation of the per-sample Euclidean errors.
struct AleStats {
  double mean = 0.0;
  double stddev = 0.0;
};

AleStats ale(std::span<const LabeledPrediction> pairs);

class Localizer {
 public:
  virtual ~Localizer() = default;

  virtual std::string id() const = 0;
  // Called once, single-threaded, before any locate() on `ds`.
  virtual void prepare(const dataset::WaveDataset& /*ds*/, std::span<const std::size_t> /*indices*/) {}
  // `raw` is the unstandardized Q x M record of sample `sample_index`.
  // Must be safe to call concurrently after prepare().
  virtual Point locate(const dataset::WaveDataset& ds, std::size_t sample_index,
                       const wavefield::TimeMatrix& raw) const = 0;
};

class DnnLocalizer : public Localizer {
 public:
  DnnLocalizer(std::string id, std::shared_ptr<const neuralloc::MlpModel> model)
      : id_(std::move(id)), model_(std::move(model)) {}

  std::string id() const override { return id_; }
  Point locate(const dataset::WaveDataset& ds, std::size_t sample_index,
               const wavefield::TimeMatrix& raw) const override;

 private:
  std::string id_;
  std::shared_ptr<const neuralloc::MlpModel> model_;
};

// Grid-search baseline with the nominal (alpha = 1) dispersion model. One
// model bank is built per distinct sensor layout.
class PhysicalLocalizer : public Localizer {
 public:
  explicit PhysicalLocalizer(physloc::Resolution resolution = {50, 50}, std::size_t subsamples = 4,
                             unsigned threads = 0, std::string id = "physical");

  std::string id() const override { return id_; }
  void prepare(const dataset::WaveDataset& ds, std::span<const std::size_t> indices) override;
  Point locate(const dataset::WaveDataset& ds, std::size_t sample_index,
               const wavefield::TimeMatrix& raw) const override;

 private:
  std::string id_;
  physloc::Resolution resolution_;
  std::size_t subsamples_;
  unsigned threads_;
  std::map<std::vector<double>, std::shared_ptr<const physloc::ModelBank>> banks_;
};

enum class Split { kTest, kTrain, kAll };

const char* to_string(Split split);
Split split_from_string(const std::string& name);
std::vector<std::size_t> split_indices(const dataset::WaveDataset& ds, Split split);

struct SweepOptions {
  std::vector<double> snrs{5.0, 10.0, 15.0, 20.0, 25.0};
  Split split = Split::kTest;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct ReportRow {
  std::string method;
  double snr_db = 0.0;
  double ale_mean = 0.0;
  double ale_std = 0.0;
  std::size_t count = 0;
};

struct LocalizationReport {
  std::vector<ReportRow> rows;
  nlohmann::json provenance = nlohmann::json::object();

  const ReportRow& row(const std::string& method, double snr_db) const;
};

// Seed of the noise realization shared by every method at (sample, snr).
std::uint64_t noise_seed(std::uint64_t master_seed, std::uint64_t sample_seed, double snr_db);

// Re-noises each clean record of the split at every SNR and runs every
// method on the identical noisy input. Rows are sorted by method, then SNR.
LocalizationReport sweep(const dataset::WaveDataset& ds, const SweepOptions& options,
                         std::span<Localizer* const> methods);

// Header `method,snr_db,ale_mean,ale_std,n`.
std::string to_csv(const LocalizationReport& report);
nlohmann::json to_json(const LocalizationReport& report);

}  // namespace gwloc::eval
