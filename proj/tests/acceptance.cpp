// Acceptance checks; prints one PASS/FAIL line per criterion.
// Usage: gwloc_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
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
#include "gwloc/rng.hpp"

using namespace gwloc;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- 1: gradient oracle --------------------------------------------------------

double batch_loss(const neuralloc::MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  neuralloc::Mode mode, std::uint64_t seed) {
  const Eigen::MatrixXd out = neuralloc::forward_batch(model, x, mode, seed).output;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    sum += std::hypot(out(0, c) - y(0, c), out(1, c) - y(1, c));
  }
  return sum / static_cast<double>(out.cols());
}

Outcome gradient_oracle() {
  const auto start = Clock::now();
  Rng rng(2718);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    neuralloc::MlpConfig config;
    config.input_dim = 4;
    config.hidden = {3, 3, 3};
    config.dropout = trial % 2 == 0 ? 0.0 : 0.25;
    auto model = neuralloc::MlpModel::he_uniform(config, 500 + trial);
    for (auto& layer : model.layers) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-0.5, 0.5);
    }
    Eigen::MatrixXd x(4, 6);
    Eigen::MatrixXd y(2, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);
    const auto mode = config.dropout > 0.0 ? neuralloc::Mode::kTrain : neuralloc::Mode::kInfer;
    const std::uint64_t seed = 900 + trial;
    const auto grads = neuralloc::backward_batch(model, neuralloc::forward_batch(model, x, mode, seed), y);
    constexpr double h = 1e-5;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = batch_loss(model, x, y, mode, seed);
        param = saved - h;
        const double down = batch_loss(model, x, y, mode, seed);
        param = saved;
        worst = std::max(worst, std::abs(analytic - (up - down) / (2.0 * h)) / std::max(1.0, std::abs(analytic)));
      };
      auto& w = model.layers[l].weights;
      for (Eigen::Index i = 0; i < w.size(); ++i) check(w.data()[i], grads.layers[l].weights.data()[i]);
      auto& b = model.layers[l].bias;
      for (Eigen::Index i = 0; i < b.size(); ++i) check(b.data()[i], grads.layers[l].bias.data()[i]);
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-6 && elapsed < 10.0,
          fmt("max relative error %.3g (< 1e-6) over 20 nets, %.2f s (< 10 s)", worst, elapsed)};
}

// ---- 2: dispersion consistency ----------------------------------------------------

Outcome dispersion_consistency() {
  const dispersion::DispersionModel base;
  double worst = 0.0;
  for (double alpha : {0.7, 1.0, 1.3}) {
    const auto model = base.with_alpha(alpha);
    for (std::size_t mode = 0; mode < model.mode_count(); ++mode) {
      for (int i = 0; i <= 400; ++i) {
        const double f = 10e3 * std::pow(100.0, i / 400.0);
        const double omega = 2.0 * std::numbers::pi * f;
        const double d = 1e-3 * omega;
        const double slope = (model.wavenumber(mode, omega + d) - model.wavenumber(mode, omega - d)) / (2.0 * d);
        const double inverse_vg = 1.0 / model.group_velocity(mode, omega);
        worst = std::max(worst, std::abs(slope - inverse_vg) / inverse_vg);
      }
    }
  }
  return {worst < 1e-6, fmt("max |dk/dw - 1/v_g| / (1/v_g) = %.3g (< 1e-6), 2 modes x 3 alphas x 401 freqs", worst)};
}

// ---- 3: wavefield laws ------------------------------------------------------------

Outcome wavefield_laws() {
  const wavefield::FrequencyGrid grid(1000, 1e6);
  double amp_err = 0.0;
  double phase_err = 0.0;
  Rng rng(77);
  for (auto curve : {dispersion::ModeCurve::linear(5400.0), dispersion::ModeCurve::square_root(0.25)}) {
    for (double alpha : {0.7, 1.0, 1.3}) {
      const dispersion::DispersionModel model({curve}, alpha);
      for (int trial = 0; trial < 5; ++trial) {
        // Receiver moved along the tx->damage->rx ray so the path doubles.
        wavefield::PlateScene near;
        near.length = near.width = 20.0;
        const wavefield::Point tx{rng.uniform(8.0, 9.0), rng.uniform(8.0, 9.0)};
        const wavefield::Point dmg{rng.uniform(9.0, 10.0), rng.uniform(9.0, 10.0)};
        const double leg = wavefield::distance(tx, dmg);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double r = leg + rng.uniform(0.1, 0.5);
        const double out_near = r - leg;
        const double out_far = 2.0 * r - leg;
        near.sensors = {tx, {dmg.x + out_near * std::cos(angle), dmg.y + out_near * std::sin(angle)}};
        near.pairs = {{0, 1}};
        near.damage = dmg;
        auto far = near;
        far.sensors[1] = {dmg.x + out_far * std::cos(angle), dmg.y + out_far * std::sin(angle)};
        const auto a = wavefield::synthesize_spectrum(near, grid, model);
        const auto b = wavefield::synthesize_spectrum(far, grid, model);
        const double rn = wavefield::scatter_path_length(near, 0);
        for (std::size_t q = 1; q < grid.bins(); ++q) {
          amp_err = std::max(amp_err, std::abs(std::abs(b(q, 0)) / std::abs(a(q, 0)) - 1.0 / std::sqrt(2.0)));
          const double expected = -model.wavenumber(0, grid.omega(q)) * rn;
          phase_err = std::max(phase_err, std::abs(std::remainder(std::arg(a(q, 0)) - expected, 2.0 * std::numbers::pi)));
        }
      }
    }
  }
  return {amp_err < 1e-9 && phase_err < 1e-9,
          fmt("amplitude ratio error %.3g, phase error %.3g rad (both < 1e-9), 999 bins x 30 scenes", amp_err,
              phase_err)};
}

// ---- 4: SNR calibration -------------------------------------------------------------

Outcome snr_calibration() {
  const wavefield::TimeTransform transform(wavefield::FrequencyGrid(250, 1e6));
  const dispersion::DispersionModel model;
  const double snrs[] = {5.0, 10.0, 15.0, 20.0, 25.0};
  double worst = 0.0;
  std::size_t smallest = SIZE_MAX;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // Alternate 8 sensors (14,000 entries) and 7 sensors (10,500 entries).
    const std::size_t sensors = seed % 2 == 0 ? 8 : 7;
    const auto scene = dataset::random_scene(1.0, 1.0, sensors, 10'000 + seed);
    const auto clean = wavefield::synthesize_time(scene, transform, model.with_alpha(dispersion::sample_alpha(seed)));
    const double snr = snrs[seed % 5];
    const auto noisy = dataset::add_awgn(clean, snr, seed);
    long double ps = 0.0L;
    long double pn = 0.0L;
    for (Eigen::Index i = 0; i < clean.values.size(); ++i) {
      const long double c = clean.values.data()[i];
      const long double n = noisy.values.data()[i] - c;
      ps += c * c;
      pn += n * n;
    }
    smallest = std::min(smallest, static_cast<std::size_t>(clean.values.size()));
    worst = std::max(worst, std::abs(static_cast<double>(10.0L * std::log10(ps / pn)) - snr));
  }
  return {worst <= 0.1 && smallest >= 10'000,
          fmt("max |realized - requested| = %.3g dB (<= 0.1) over 100 seeds, min entries %zu", worst, smallest)};
}

// ---- 5: noiseless grid recovery -----------------------------------------------------

Outcome grid_recovery() {
  const auto start = Clock::now();
  dataset::GenerationConfig config = dataset::GenerationConfig::ideal({});
  config.samples = 100;
  config.bins = 250;
  config.seed = 1;
  const auto ds = dataset::generate(config);
  const physloc::ModelBank bank(ds.layout_for(0), ds.grid, dispersion::DispersionModel(ds.modes, 1.0), {50, 50},
                                {ds.window, 4, 0});
  const double tolerance = std::sqrt(2.0) / 50.0;
  int recovered = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto map = bank.score(ds.data_matrix(i));
    const double err = wavefield::distance(map.argmax, ds.samples[i].label);
    worst = std::max(worst, err);
    if (err <= tolerance) ++recovered;
  }
  const double elapsed = seconds_since(start);
  return {recovered >= 99 && elapsed < 300.0,
          fmt("%d/100 within one cell diagonal (>= 99), worst error %.4f m, %.1f s (< 300 s)", recovered, worst,
              elapsed)};
}

// ---- 6 and 7: DNN comparisons --------------------------------------------------------

struct SeedRun {
  std::uint64_t seed;
  eval::LocalizationReport report;
};

// Trains both networks for each seed once and sweeps them with the baseline.
const std::vector<SeedRun>& dnn_runs() {
  static std::vector<SeedRun> runs;
  if (!runs.empty()) return runs;
  for (std::uint64_t seed : {1, 2, 3}) {
    dataset::GenerationConfig uncertain;
    uncertain.samples = 500;
    uncertain.bins = 250;
    uncertain.seed = seed;
    const auto ideal_raw = dataset::generate(dataset::GenerationConfig::ideal(uncertain));
    const auto uncertain_raw = dataset::generate(uncertain);

    neuralloc::MlpConfig mlp;
    mlp.seed = seed;
    auto model_b = std::make_shared<const neuralloc::MlpModel>(
        neuralloc::train(dataset::standardize_fit_transform(ideal_raw), mlp));
    auto model_a = std::make_shared<const neuralloc::MlpModel>(
        neuralloc::train(dataset::standardize_fit_transform(uncertain_raw), mlp));

    eval::DnnLocalizer a("dnn_a", model_a);
    eval::DnnLocalizer b("dnn_b", model_b);
    eval::PhysicalLocalizer physical({50, 50}, 4);
    std::vector<eval::Localizer*> methods{&a, &b, &physical};
    eval::SweepOptions options;
    options.seed = seed;
    runs.push_back({seed, eval::sweep(uncertain_raw, options, methods)});
  }
  return runs;
}

Outcome dnn_ordering() {
  const auto start = Clock::now();
  const auto& runs = dnn_runs();
  int ordered_seeds = 0;
  bool a_below = true;
  std::string detail;
  for (const auto& run : runs) {
    bool ordered = true;
    for (double snr : {5.0, 10.0, 15.0, 20.0, 25.0}) {
      ordered = ordered && run.report.row("dnn_a", snr).ale_mean < run.report.row("dnn_b", snr).ale_mean;
    }
    const double a25 = run.report.row("dnn_a", 25.0).ale_mean;
    const double b25 = run.report.row("dnn_b", 25.0).ale_mean;
    a_below = a_below && a25 < 0.15;
    if (ordered) ++ordered_seeds;
    detail += fmt("seed %llu: A@25 %.4f B@25 %.4f %s; ", static_cast<unsigned long long>(run.seed), a25, b25,
                  ordered ? "A<B at all SNRs" : "order broken");
  }
  const double elapsed = seconds_since(start);
  return {ordered_seeds >= 2 && a_below && elapsed < 1800.0,
          detail + fmt("%d/3 seeds ordered (>= 2), A@25 < 0.15 m for every seed, %.0f s (< 1800 s)", ordered_seeds,
                       elapsed)};
}

Outcome dnn_vs_physical() {
  const auto& runs = dnn_runs();
  bool all = true;
  std::string detail;
  for (const auto& run : runs) {
    double dnn = 0.0;
    double physical = 0.0;
    for (double snr : {5.0, 10.0, 15.0, 20.0, 25.0}) {
      dnn += run.report.row("dnn_a", snr).ale_mean / 5.0;
      physical += run.report.row("physical", snr).ale_mean / 5.0;
    }
    all = all && dnn < physical;
    detail += fmt("seed %llu: mean ALE A %.4f vs physical %.4f; ", static_cast<unsigned long long>(run.seed), dnn,
                  physical);
  }
  return {all, detail + "A below the baseline for every seed"};
}

// ---- 8: pipeline determinism ---------------------------------------------------------

Outcome pipeline_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "gwloc_acceptance_pipeline";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = GWLOC_CLI_PATH;
  std::vector<std::string> digests[2];
  for (int run = 0; run < 2; ++run) {
    const std::string p = (dir / ("run" + std::to_string(run))).string();
    std::filesystem::create_directories(p);
    const std::string threads = run == 0 ? "0" : "1";
    const std::string cmds[] = {
        cli + " gen --t 120 --q 64 --sensors 5 --seed 11 --threads " + threads + " --out " + p + "/d.gwds",
        cli + " train --data " + p + "/d.gwds --epochs 4 --hidden 64,32 --seed 11 --out " + p + "/m.gwnn",
        cli + " eval --data " + p + "/d.gwds --dnn net=" + p + "/m.gwnn --physical --physical-resolution 10x10 " +
            "--seed 11 --threads " + threads + " --out " + p + "/r.csv",
    };
    for (const auto& cmd : cmds) {
      if (std::system((cmd + " > /dev/null 2>&1").c_str()) != 0) return {false, "command failed: " + cmd};
    }
    for (const char* name : {"d.gwds", "m.gwnn", "r.csv", "r.json"}) {
      std::string json_text;
      auto bytes = container::read_file(p + "/" + name);
      if (std::string(name) == "r.json") {
        // The sidecar echoes the input paths, which differ between the two run directories.
        auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        j["config"].erase("data");
        j["config"].erase("dnn");
        json_text = j.dump();
        bytes.assign(json_text.begin(), json_text.end());
      }
      digests[run].push_back(container::sha256_hex(bytes));
    }
  }
  std::filesystem::remove_all(dir);
  const bool same = digests[0] == digests[1];
  return {same, fmt("dataset, checkpoint, report CSV and sidecar %s across reruns (threads 0 vs 1)",
                    same ? "byte-identical" : "DIFFER")};
}

// ---- 9: format round trips -----------------------------------------------------------

Outcome format_round_trips() {
  dataset::GenerationConfig config;
  config.samples = 40;
  config.bins = 64;
  config.sensors = 5;
  config.seed = 3;
  const auto ds = dataset::generate(config);
  const auto ds_bytes = dataset::serialize(ds);
  const bool ds_same = dataset::serialize(dataset::deserialize(ds_bytes)) == ds_bytes;

  neuralloc::MlpConfig mlp;
  mlp.hidden = {32, 16};
  mlp.epochs = 2;
  const auto model = neuralloc::train(dataset::standardize_fit_transform(ds), mlp);
  const auto nn_bytes = neuralloc::serialize(model);
  const bool nn_same = neuralloc::serialize(neuralloc::deserialize(nn_bytes)) == nn_bytes;

  auto rejects = [](auto bytes, auto&& reader) {
    bytes[1] ^= 0x01;
    try {
      reader(bytes);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kFormat;
    }
    return false;
  };
  const bool ds_rejected = rejects(ds_bytes, [](const auto& b) { dataset::deserialize(b); });
  const bool nn_rejected = rejects(nn_bytes, [](const auto& b) { neuralloc::deserialize(b); });
  return {ds_same && nn_same && ds_rejected && nn_rejected,
          fmt("GWDS rewrite %s, GWNN rewrite %s, corrupted magic -> format error: GWDS %s, GWNN %s",
              ds_same ? "identical" : "DIFFERS", nn_same ? "identical" : "DIFFERS", ds_rejected ? "yes" : "no",
              nn_rejected ? "yes" : "no")};
}

// ---- 10: ALE oracle -----------------------------------------------------------------

Outcome ale_oracle() {
  Rng rng(1010);
  std::vector<eval::LabeledPrediction> pairs(1000);
  std::vector<double> tx(1000), ty(1000), px(1000), py(1000);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    tx[i] = rng.uniform();
    ty[i] = rng.uniform();
    px[i] = rng.uniform(-0.2, 1.2);
    py[i] = rng.uniform(-0.2, 1.2);
    pairs[i] = {{tx[i], ty[i]}, {px[i], py[i]}};
  }
  long double sum = 0.0L;
  for (std::size_t i = 0; i < 1000; ++i) {
    const long double dx = tx[i] - px[i];
    const long double dy = ty[i] - py[i];
    sum += std::sqrt(dx * dx + dy * dy);
  }
  const double oracle = static_cast<double>(sum / 1000.0L);
  const double diff = std::abs(eval::ale(pairs).mean - oracle);
  return {diff < 1e-12, fmt("|ALE - oracle| = %.3g (< 1e-12) on 1000 random pairs", diff)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"gradient oracle", gradient_oracle}},
      {2, {"dispersion consistency", dispersion_consistency}},
      {3, {"wavefield amplitude and phase laws", wavefield_laws}},
      {4, {"SNR calibration", snr_calibration}},
      {5, {"noiseless 50x50 grid recovery", grid_recovery}},
      {6, {"DNN-A below DNN-B at every SNR", dnn_ordering}},
      {7, {"DNN-A below the physical baseline", dnn_vs_physical}},
      {8, {"pipeline determinism", pipeline_determinism}},
      {9, {"format round trips", format_round_trips}},
      {10, {"ALE oracle", ale_oracle}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome outcome;
    try {
      outcome = entry.second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s  %2d  %s: %s\n", outcome.pass ? "PASS" : "FAIL", id, entry.first, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
