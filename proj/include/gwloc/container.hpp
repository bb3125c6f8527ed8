#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gwloc::container {

// Layout shared by GWDS and GWNN files:
//   8-byte magic | u64 little-endian header length | UTF-8 JSON header | payload
inline constexpr std::size_t kMagicSize = 8;

std::vector<std::uint8_t> pack(std::string_view magic, const nlohmann::json& header,
                               std::span<const std::uint8_t> payload);

struct Unpacked {
  nlohmann::json header;
  std::span<const std::uint8_t> payload;
};

// Throws kFormat on a wrong magic, a truncated header or malformed JSON.
Unpacked unpack(std::string_view magic, std::span<const std::uint8_t> bytes);

// Little-endian float32 stream.
class FloatWriter {
 public:
  void put(float v);
  void put(std::span<const float> values);
  void put_double(double v) { put(static_cast<float>(v)); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }
  void reserve(std::size_t floats) { bytes_.reserve(floats * 4); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class FloatReader {
 public:
  explicit FloatReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  float get();
  void get(std::span<float> out);
  std::size_t remaining_floats() const { return (bytes_.size() - pos_) / 4; }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text(const std::string& path, std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// JSON encoding of an SNR: finite values as numbers, +inf as the string "inf".
nlohmann::json snr_to_json(double snr_db);
double snr_from_json(const nlohmann::json& value);

}  // namespace gwloc::container
