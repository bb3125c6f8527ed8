#include <doctest.h>

#include <cmath>
#include <set>

#include "gwloc/container.hpp"
#include "gwloc/dataset.hpp"
#include "gwloc/dataset_io.hpp"
#include "gwloc/rng.hpp"
#include "support.hpp"

using namespace gwloc;
using namespace gwloc::dataset;

namespace {

GenerationConfig small_config(std::size_t samples = 20, std::size_t bins = 50, std::size_t sensors = 4) {
  GenerationConfig c;
  c.samples = samples;
  c.bins = bins;
  c.sensors = sensors;
  c.seed = 5;
  c.threads = 1;
  return c;
}

// Mean square of the noise actually added, computed independently of the library.
double oracle_snr(const wavefield::TimeMatrix& clean, const wavefield::TimeMatrix& noisy) {
  long double ps = 0.0L;
  long double pn = 0.0L;
  for (Eigen::Index i = 0; i < clean.values.size(); ++i) {
    const long double c = clean.values.data()[i];
    const long double n = noisy.values.data()[i] - c;
    ps += c * c;
    pn += n * n;
  }
  return static_cast<double>(10.0L * std::log10(ps / pn));
}

}  // namespace

TEST_CASE("random scenes enumerate ordered pairs and respect clearance") {
  CHECK(random_scene(1.0, 1.0, 8, 3).pairs.size() == 56);
  CHECK(random_scene(1.0, 1.0, 2, 3).pairs.size() == 2);
  const auto a = random_scene(1.0, 1.0, 8, 77);
  const auto b = random_scene(1.0, 1.0, 8, 77);
  CHECK(a.sensors == b.sensors);
  CHECK(a.damage == b.damage);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto scene = random_scene(1.0, 0.5, 6, s);
    CHECK(scene.damage_clearance() >= wavefield::kMinDistance);
    CHECK(scene.contains(scene.damage));
    for (const auto& p : scene.sensors) CHECK(scene.contains(p));
  }
  CHECK(testing::error_code([] { random_scene(1.0, 1.0, 1, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("damage placement gives up on a plate covered by sensors") {
  wavefield::PlateScene layout;
  layout.length = 0.01;
  layout.width = 0.01;
  layout.sensors = {{0.005, 0.005}, {0.0, 0.0}};
  layout.pairs = wavefield::all_ordered_pairs(2);
  CHECK(testing::error_code([&] { random_damage(layout, 1); }) == ErrorCode::kGeometry);
}

TEST_CASE("AWGN: infinite SNR is the identity, zero signal is degenerate") {
  wavefield::TimeMatrix m{wavefield::RowMatrix::Random(30, 12), 5e-7};
  const auto same = add_awgn(m, kNoNoise, 9);
  CHECK(same.values == m.values);
  wavefield::TimeMatrix zero{wavefield::RowMatrix::Zero(30, 12), 5e-7};
  CHECK(testing::error_code([&] { add_awgn(zero, 5.0, 1); }) == ErrorCode::kDegenerateSignal);
  CHECK(add_awgn(zero, kNoNoise, 1).values == zero.values);
}

TEST_CASE("AWGN calibration at 5 dB on a 1000 x 56 matrix") {
  const auto scene = random_scene(1.0, 1.0, 8, 4);
  const wavefield::TimeTransform transform(wavefield::FrequencyGrid(1000, 1e6));
  const auto clean = wavefield::synthesize_time(scene, transform, dispersion::DispersionModel());
  REQUIRE(clean.values.size() == 56000);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto noisy = add_awgn(clean, 5.0, seed);
    CHECK(std::abs(oracle_snr(clean, noisy) - 5.0) < 0.1);
  }
  const auto a = add_awgn(clean, 5.0, 3);
  const auto b = add_awgn(clean, 5.0, 3);
  CHECK(a.values == b.values);
}

TEST_CASE("AWGN realization is zero-mean Gaussian at the calibrated power") {
  wavefield::TimeMatrix m{wavefield::RowMatrix::Constant(200, 100, 0.5), 5e-7};
  const auto noisy = add_awgn(m, 10.0, 42);
  const Eigen::ArrayXd n = (noisy.values - m.values).reshaped().array();
  const double var = n.square().mean();
  CHECK(var == doctest::Approx(0.25 / 10.0).epsilon(1e-12));
  CHECK(std::abs(n.mean()) < 4.0 * std::sqrt(var / 20000.0));
  const double kurtosis = n.pow(4).mean() / (var * var);
  CHECK(std::abs(kurtosis - 3.0) < 0.15);
}

TEST_CASE("generation: shapes, provenance and ideal mode") {
  auto config = small_config();
  const auto ds = generate(config);
  CHECK(ds.samples.size() == 20);
  CHECK(ds.pair_count() == 12);
  CHECK(ds.train.size() == 16);
  CHECK(ds.test.size() == 4);
  std::set<std::size_t> all(ds.train.begin(), ds.train.end());
  all.insert(ds.test.begin(), ds.test.end());
  CHECK(all.size() == 20);
  for (const auto& s : ds.samples) {
    CHECK(s.data.size() == 50 * 12);
    CHECK(s.clean.size() == 50 * 12);
    CHECK(s.alpha >= 0.7);
    CHECK(s.alpha <= 1.3);
    CHECK(s.snr_db == 25.0);
  }

  const auto ideal = generate(GenerationConfig::ideal(config));
  for (std::size_t i = 0; i < ideal.samples.size(); ++i) {
    CHECK(ideal.samples[i].alpha == 1.0);
    CHECK(std::isinf(ideal.samples[i].snr_db));
    CHECK(ideal.samples[i].data == ideal.samples[i].clean);
    CHECK(ideal.samples[i].label == ds.samples[i].label);
  }
  CHECK(ideal.sensors == ds.sensors);
  CHECK(ideal.train == ds.train);
}

TEST_CASE("generation is deterministic and independent of the worker count") {
  auto config = small_config(10);
  const auto a = serialize(generate(config));
  config.threads = 3;
  const auto b = serialize(generate(config));
  CHECK(a == b);
  config.seed = 6;
  CHECK(serialize(generate(config)) != a);
}

TEST_CASE("generation property sweep over random configurations") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    GenerationConfig c;
    c.samples = 1 + rng.below(4);
    c.bins = 2 + rng.below(30);
    c.sensors = 2 + rng.below(5);
    c.plate_length = rng.uniform(0.3, 2.0);
    c.plate_width = rng.uniform(0.3, 2.0);
    c.snr_db = rng.bernoulli(0.3) ? kNoNoise : rng.uniform(0.0, 30.0);
    c.per_sample_sensors = rng.bernoulli(0.5);
    c.train_fraction = 1.0;
    c.seed = rng.next_u64();
    c.threads = 1;
    const auto ds = generate(c);
    ds.validate();
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      const auto scene = ds.scene_for(i);
      CHECK(scene.contains(scene.damage));
      CHECK(scene.damage_clearance() >= wavefield::kMinDistance);
      CHECK(ds.samples[i].data.size() == c.bins * c.sensors * (c.sensors - 1));
      for (float v : ds.samples[i].data) REQUIRE(std::isfinite(v));
    }
  }
}

TEST_CASE("invalid generation parameters") {
  auto c = small_config();
  c.samples = 0;
  CHECK(testing::error_code([&] { generate(c); }) == ErrorCode::kInvalidArgument);
  c = small_config();
  c.bins = 1;
  CHECK(testing::error_code([&] { generate(c); }) == ErrorCode::kInvalidArgument);
  c = small_config();
  c.sensors = 1;
  CHECK(testing::error_code([&] { generate(c); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("realized SNR of generated samples") {
  auto c = small_config(5, 250, 8);
  c.snr_db = 12.0;
  const auto ds = generate(c);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(std::abs(oracle_snr(ds.clean_matrix(i), ds.data_matrix(i)) - 12.0) < 0.1);
  }
}

TEST_CASE("standardization statistics") {
  const auto raw = generate(small_config(40));
  const auto stats = fit_standardization(raw);
  const std::size_t features = raw.feature_count();
  REQUIRE(stats.size() == features);
  std::size_t checked = 0;
  for (std::size_t j = 0; j < features; ++j) {
    long double sum = 0.0L;
    long double sq = 0.0L;
    for (std::size_t i : raw.train) {
      const double z = stats.transform(j, raw.samples[i].data[j]);
      sum += z;
      sq += static_cast<long double>(z) * z;
    }
    const double n = static_cast<double>(raw.train.size());
    const double mean = static_cast<double>(sum / n);
    CHECK(std::abs(mean) < 1e-9);
    if (stats.stddev[j] > Standardization::kStdFloor) {
      CHECK(std::abs(std::sqrt(static_cast<double>(sq / n) - mean * mean) - 1.0) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > features / 2);

  const auto ds = standardize_fit_transform(raw);
  CHECK(ds.standardized);
  std::size_t nonzero_means = 0;
  for (std::size_t j = 0; j < features; ++j) {
    double test_mean = 0.0;
    for (std::size_t i : ds.test) test_mean += ds.samples[i].data[j];
    if (std::abs(test_mean / static_cast<double>(ds.test.size())) > 1e-6) ++nonzero_means;
  }
  CHECK(nonzero_means > features / 2);
  CHECK(ds.samples[ds.test[0]].clean == raw.samples[ds.test[0]].clean);
  CHECK(testing::error_code([&] { standardize_fit_transform(ds); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("constant features map to zero") {
  auto raw = generate(small_config(10, 20, 3));
  for (auto& s : raw.samples) s.data[7] = 3.25f;
  const auto ds = standardize_fit_transform(raw);
  for (const auto& s : ds.samples) CHECK(s.data[7] == 0.0f);
}

TEST_CASE("flattening is q-major and invertible") {
  wavefield::TimeMatrix m{wavefield::RowMatrix::Random(7, 5).cast<float>().cast<double>(), 1e-6};
  const auto flat = to_floats(m);
  CHECK(flat[3 * 5 + 2] == static_cast<float>(m.values(3, 2)));
  const auto back = to_matrix(flat, 7, 5, 1e-6);
  CHECK(back.values == m.values);
  CHECK(testing::error_code([&] { to_matrix(flat, 7, 4, 1e-6); }) == ErrorCode::kShape);
}
