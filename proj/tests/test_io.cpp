#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "gwloc/container.hpp"
#include "gwloc/dataset_io.hpp"
#include "gwloc/mlp_io.hpp"
#include "support.hpp"

using namespace gwloc;

namespace {

dataset::WaveDataset small_dataset(bool per_sample = false) {
  dataset::GenerationConfig c;
  c.samples = 12;
  c.bins = 16;
  c.sensors = 3;
  c.seed = 21;
  c.per_sample_sensors = per_sample;
  c.window.enabled = per_sample;
  return dataset::generate(c);
}

std::uint64_t header_length(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
  return v;
}

}  // namespace

TEST_CASE("container framing") {
  const nlohmann::json header = {{"a", 1}};
  const std::vector<std::uint8_t> payload{1, 2, 3};
  const auto bytes = container::pack("TESTMAG1", header, payload);
  CHECK(std::memcmp(bytes.data(), "TESTMAG1", 8) == 0);
  CHECK(header_length(bytes) == header.dump().size());
  const auto u = container::unpack("TESTMAG1", bytes);
  CHECK(u.header == header);
  CHECK(std::vector<std::uint8_t>(u.payload.begin(), u.payload.end()) == payload);
  CHECK(testing::error_code([&] { container::unpack("OTHERMAG", bytes); }) == ErrorCode::kFormat);
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + 12);
  CHECK(testing::error_code([&] { container::unpack("TESTMAG1", truncated); }) == ErrorCode::kFormat);
}

TEST_CASE("float stream is little-endian IEEE-754") {
  container::FloatWriter w;
  w.put(1.0f);
  const auto& b = w.bytes();
  CHECK(b == std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3f});
  container::FloatReader r(b);
  CHECK(r.get() == 1.0f);
  CHECK(r.exhausted());
}

TEST_CASE("SHA-256 of a known message") {
  const std::string abc = "abc";
  const std::vector<std::uint8_t> bytes(abc.begin(), abc.end());
  CHECK(container::sha256_hex(bytes) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("GWDS round trip is byte-identical") {
  for (bool per_sample : {false, true}) {
    const auto ds = small_dataset(per_sample);
    const auto bytes = dataset::serialize(ds);
    const auto back = dataset::deserialize(bytes);
    CHECK(dataset::serialize(back) == bytes);
    CHECK(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      CHECK(back.samples[i].data == ds.samples[i].data);
      CHECK(back.samples[i].clean == ds.samples[i].clean);
      CHECK(back.samples[i].alpha == ds.samples[i].alpha);
      CHECK(back.samples[i].seed == ds.samples[i].seed);
      CHECK(back.samples[i].sensors == ds.samples[i].sensors);
    }
    CHECK(back.train == ds.train);
    CHECK(back.test == ds.test);
    CHECK(back.sensors == ds.sensors);
    CHECK(back.window.enabled == ds.window.enabled);
  }
}

TEST_CASE("GWDS header documents the layout") {
  auto ideal_config = small_dataset().config;
  const auto ds = dataset::generate(dataset::GenerationConfig::ideal(ideal_config));
  const auto bytes = dataset::serialize(ds);
  CHECK(std::memcmp(bytes.data(), dataset::kDatasetMagic, 8) == 0);
  const auto u = container::unpack(dataset::kDatasetMagic, bytes);
  CHECK(u.header.at("Q") == 16);
  CHECK(u.header.at("M") == 6);
  CHECK(u.header.at("t") == 12);
  CHECK(u.header.at("samples").at(0).at("snr_db") == "inf");
  CHECK(u.header.at("flatten_order") == dataset::kFlattenOrder);
  CHECK(u.payload.size() == 4u * (2u * 12u * 16u * 6u + 2u * 12u));
}

TEST_CASE("standardized GWDS keeps its statistics") {
  const auto ds = dataset::standardize_fit_transform(small_dataset());
  const auto bytes = dataset::serialize(ds);
  const auto back = dataset::deserialize(bytes);
  CHECK(back.standardized);
  REQUIRE(back.standardization.has_value());
  CHECK(back.standardization->mean == ds.standardization->mean);
  CHECK(dataset::serialize(back) == bytes);
}

TEST_CASE("corrupted GWDS files are rejected") {
  auto bytes = dataset::serialize(small_dataset());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(testing::error_code([&] { dataset::deserialize(bad_magic); }) == ErrorCode::kFormat);
  auto short_payload = bytes;
  short_payload.resize(bytes.size() - 4);
  CHECK(testing::error_code([&] { dataset::deserialize(short_payload); }) == ErrorCode::kFormat);
  auto bad_json = bytes;
  bad_json[16] = '!';
  CHECK(testing::error_code([&] { dataset::deserialize(bad_json); }) == ErrorCode::kFormat);
  CHECK(testing::error_code([&] { dataset::deserialize(neuralloc::serialize(neuralloc::MlpModel::zeros([] {
          neuralloc::MlpConfig c;
          c.input_dim = 3;
          return c;
        }()))); }) == ErrorCode::kFormat);
}

TEST_CASE("GWNN round trip is byte-identical") {
  const auto ds = dataset::standardize_fit_transform(small_dataset());
  neuralloc::MlpConfig c;
  c.hidden = {8, 4};
  c.epochs = 2;
  c.optimizer = neuralloc::Optimizer::kSgd;
  const auto model = neuralloc::train(ds, c);
  const auto bytes = neuralloc::serialize(model);
  CHECK(std::memcmp(bytes.data(), neuralloc::kCheckpointMagic, 8) == 0);
  const auto back = neuralloc::deserialize(bytes);
  CHECK(neuralloc::serialize(back) == bytes);
  CHECK(back.config.hidden == c.hidden);
  CHECK(back.config.optimizer == neuralloc::Optimizer::kSgd);
  CHECK(back.training_log.size() == 2);
  CHECK(back.parameter_count() == model.parameter_count());
  const auto u = container::unpack(neuralloc::kCheckpointMagic, bytes);
  CHECK(u.payload.size() == 4 * model.parameter_count());

  auto corrupt = bytes;
  corrupt[3] ^= 0x20;
  CHECK(testing::error_code([&] { neuralloc::deserialize(corrupt); }) == ErrorCode::kFormat);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK(testing::error_code([&] { neuralloc::deserialize(truncated); }) == ErrorCode::kFormat);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "gwloc_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "d.gwds").string();
  const auto ds = small_dataset();
  dataset::save(ds, path);
  CHECK(dataset::serialize(dataset::load(path)) == dataset::serialize(ds));
  CHECK(testing::error_code([&] { dataset::load((dir / "missing.gwds").string()); }) == ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}
