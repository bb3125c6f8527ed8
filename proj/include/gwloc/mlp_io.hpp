#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gwloc/mlp.hpp"

namespace gwloc::neuralloc {

// GWNN version 1:
//   "GWNN0001" | u64 LE header length | JSON header |
//   per layer: weights row-major (out x in) then biases, float32 LE
inline constexpr char kCheckpointMagic[] = "GWNN0001";

std::vector<std::uint8_t> serialize(const MlpModel& model);
MlpModel deserialize(std::span<const std::uint8_t> bytes);

void save(const MlpModel& model, const std::string& path);
MlpModel load(const std::string& path);

}  // namespace gwloc::neuralloc
