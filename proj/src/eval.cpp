#include "gwloc/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "gwloc/container.hpp"
#include "gwloc/error.hpp"
#include "gwloc/parallel.hpp"
#include "gwloc/rng.hpp"

namespace gwloc::eval {

namespace {

// Above this many distinct layouts the banks are built per call instead of
// being cached (each bank holds cells x Q x M floats).
constexpr std::size_t kMaxCachedLayouts = 4;

std::vector<double> layout_key(const std::vector<Point>& sensors) {
  std::vector<double> key;
  key.reserve(2 * sensors.size());
  for (const auto& s : sensors) {
    key.push_back(s.x);
    key.push_back(s.y);
  }
  return key;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

AleStats ale(std::span<const LabeledPrediction> pairs) {
  if (pairs.empty()) fail(ErrorCode::kInvalidArgument, "ALE of an empty prediction list");
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& p : pairs) errors.push_back(wavefield::distance(p.truth, p.predicted));
  const auto n = static_cast<double>(errors.size());
  AleStats stats;
  for (double e : errors) stats.mean += e;
  stats.mean /= n;
  double var = 0.0;
  for (double e : errors) var += (e - stats.mean) * (e - stats.mean);
  stats.stddev = std::sqrt(var / n);
  return stats;
}

Point DnnLocalizer::locate(const dataset::WaveDataset& /*ds*/, std::size_t /*sample_index*/,
                           const wavefield::TimeMatrix& raw) const {
  return neuralloc::predict(*model_, raw, false);
}

PhysicalLocalizer::PhysicalLocalizer(physloc::Resolution resolution, std::size_t subsamples, unsigned threads,
                                     std::string id)
    : id_(std::move(id)), resolution_(resolution), subsamples_(subsamples), threads_(threads) {}

void PhysicalLocalizer::prepare(const dataset::WaveDataset& ds, std::span<const std::size_t> indices) {
  banks_.clear();
  std::map<std::vector<double>, std::size_t> layouts;
  for (std::size_t i : indices) layouts.emplace(layout_key(ds.sensors_for(i)), i);
  if (layouts.size() > kMaxCachedLayouts) return;
  const dispersion::DispersionModel nominal(ds.modes, 1.0);
  for (const auto& [key, sample] : layouts) {
    banks_[key] = std::make_shared<const physloc::ModelBank>(
        ds.layout_for(sample), ds.grid, nominal, resolution_,
        physloc::BankOptions{ds.window, subsamples_, threads_});
  }
}

Point PhysicalLocalizer::locate(const dataset::WaveDataset& ds, std::size_t sample_index,
                                const wavefield::TimeMatrix& raw) const {
  const auto it = banks_.find(layout_key(ds.sensors_for(sample_index)));
  if (it != banks_.end()) return it->second->score(raw).argmax;
  const dispersion::DispersionModel nominal(ds.modes, 1.0);
  const physloc::ModelBank bank(ds.layout_for(sample_index), ds.grid, nominal, resolution_,
                                physloc::BankOptions{ds.window, subsamples_, 1});
  return bank.score(raw).argmax;
}

const char* to_string(Split split) {
  switch (split) {
    case Split::kTest: return "test";
    case Split::kTrain: return "train";
    case Split::kAll: return "all";
  }
  return "test";
}

Split split_from_string(const std::string& name) {
  if (name == "test") return Split::kTest;
  if (name == "train") return Split::kTrain;
  if (name == "all") return Split::kAll;
  fail(ErrorCode::kInvalidArgument, "unknown split '" + name + "' (expected test, train or all)");
}

std::vector<std::size_t> split_indices(const dataset::WaveDataset& ds, Split split) {
  switch (split) {
    case Split::kTest: return ds.test;
    case Split::kTrain: return ds.train;
    case Split::kAll: {
      std::vector<std::size_t> all(ds.samples.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
  }
  return ds.test;
}

const ReportRow& LocalizationReport::row(const std::string& method, double snr_db) const {
  for (const auto& r : rows) {
    if (r.method == method && r.snr_db == snr_db) return r;
  }
  fail(ErrorCode::kIndex, "no report row for " + method + " at " + format_number(snr_db) + " dB");
}

std::uint64_t noise_seed(std::uint64_t master_seed, std::uint64_t sample_seed, double snr_db) {
  return derive_seed(derive_seed(master_seed, sample_seed), std::bit_cast<std::uint64_t>(snr_db));
}

LocalizationReport sweep(const dataset::WaveDataset& ds, const SweepOptions& options,
                         std::span<Localizer* const> methods) {
  if (options.snrs.empty()) fail(ErrorCode::kInvalidArgument, "SNR list is empty");
  if (methods.empty()) fail(ErrorCode::kInvalidArgument, "no localization methods given");
  if (!ds.has_clean) fail(ErrorCode::kFormat, "dataset carries no clean payload to re-noise");
  const std::vector<std::size_t> indices = split_indices(ds, options.split);
  if (indices.empty()) fail(ErrorCode::kSplit, std::string(to_string(options.split)) + " split is empty");

  for (Localizer* m : methods) m->prepare(ds, indices);

  const std::size_t n_snr = options.snrs.size();
  const std::size_t n_methods = methods.size();
  // predictions[(snr * n_methods + method) * n + k]
  std::vector<LabeledPrediction> predictions(n_snr * n_methods * indices.size());
  parallel_for(indices.size(), options.threads, [&](std::size_t k) {
    const std::size_t sample = indices[k];
    const wavefield::TimeMatrix clean = ds.clean_matrix(sample);
    for (std::size_t s = 0; s < n_snr; ++s) {
      const double snr = options.snrs[s];
      const wavefield::TimeMatrix noisy =
          dataset::add_awgn(clean, snr, noise_seed(options.seed, ds.samples[sample].seed, snr));
      for (std::size_t m = 0; m < n_methods; ++m) {
        predictions[(s * n_methods + m) * indices.size() + k] = {ds.samples[sample].label,
                                                                 methods[m]->locate(ds, sample, noisy)};
      }
    }
  });

  LocalizationReport report;
  for (std::size_t s = 0; s < n_snr; ++s) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const std::span<const LabeledPrediction> block(
          predictions.data() + (s * n_methods + m) * indices.size(), indices.size());
      const AleStats stats = ale(block);
      report.rows.push_back({methods[m]->id(), options.snrs[s], stats.mean, stats.stddev, indices.size()});
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.snr_db < b.snr_db;
  });

  nlohmann::json snrs = nlohmann::json::array();
  for (double snr : options.snrs) snrs.push_back(container::snr_to_json(snr));
  report.provenance = {
      {"seed", options.seed},
      {"dataset_seed", ds.seed},
      {"split", to_string(options.split)},
      {"snrs", snrs},
      {"sample_count", indices.size()},
  };
  return report;
}

std::string to_csv(const LocalizationReport& report) {
  std::string out = "method,snr_db,ale_mean,ale_std,n\n";
  for (const auto& r : report.rows) {
    out += r.method + ',' + format_number(r.snr_db) + ',' + format_number(r.ale_mean) + ',' +
           format_number(r.ale_std) + ',' + std::to_string(r.count) + '\n';
  }
  return out;
}

nlohmann::json to_json(const LocalizationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"snr_db", container::snr_to_json(r.snr_db)},
                    {"ale_mean", r.ale_mean},
                    {"ale_std", r.ale_std},
                    {"n", r.count}});
  }
  return {{"rows", rows}, {"provenance", report.provenance}};
}

}  // namespace gwloc::eval
