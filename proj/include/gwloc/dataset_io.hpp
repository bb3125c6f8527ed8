#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwloc/dataset.hpp"

namespace gwloc::dataset {

// GWDS version 1:
//   "GWDS0001" | u64 LE header length | JSON header |
//   t records of Q*M float32 LE (data, q-major) |
//   t records of Q*M float32 LE (clean, present when has_clean) |
//   t x 2 float32 LE labels (x, y)
inline constexpr char kDatasetMagic[] = "GWDS0001";
inline constexpr char kFlattenOrder[] = "q-major: feature index = q * M + pair";

nlohmann::json config_to_json(const GenerationConfig& config);
GenerationConfig config_from_json(const nlohmann::json& j);

nlohmann::json modes_to_json(const std::vector<dispersion::ModeCurve>& modes);
std::vector<dispersion::ModeCurve> modes_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> serialize(const WaveDataset& ds);
WaveDataset deserialize(std::span<const std::uint8_t> bytes);

void save(const WaveDataset& ds, const std::string& path);
WaveDataset load(const std::string& path);

}  // namespace gwloc::dataset
