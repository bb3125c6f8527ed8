#include "gwloc/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <openssl/evp.h>

#include "gwloc/error.hpp"

namespace gwloc::container {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> pack(std::string_view magic, const nlohmann::json& header,
                               std::span<const std::uint8_t> payload) {
  if (magic.size() != kMagicSize) fail(ErrorCode::kInternal, "magic must be 8 bytes");
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(kMagicSize + 8 + text.size() + payload.size());
  out.resize(kMagicSize);
  std::memcpy(out.data(), magic.data(), kMagicSize);
  put_u64(out, text.size());
  const std::size_t at = out.size();
  out.resize(at + text.size() + payload.size());
  std::memcpy(out.data() + at, text.data(), text.size());
  if (!payload.empty()) std::memcpy(out.data() + at + text.size(), payload.data(), payload.size());
  return out;
}

Unpacked unpack(std::string_view magic, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagicSize + 8 ||
      std::memcmp(bytes.data(), magic.data(), kMagicSize) != 0) {
    fail(ErrorCode::kFormat, "bad magic: expected " + std::string(magic));
  }
  const std::uint64_t length = get_u64(bytes.subspan(kMagicSize, 8));
  const std::size_t start = kMagicSize + 8;
  if (length > bytes.size() - start) fail(ErrorCode::kFormat, "header length exceeds file size");
  Unpacked out;
  try {
    out.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                       bytes.begin() + static_cast<std::ptrdiff_t>(start + length));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed header: ") + e.what());
  }
  out.payload = bytes.subspan(start + length);
  return out;
}

void FloatWriter::put(float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void FloatWriter::put(std::span<const float> values) {
  for (float v : values) put(v);
}

float FloatReader::get() {
  if (bytes_.size() - pos_ < 4) fail(ErrorCode::kFormat, "payload truncated");
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return std::bit_cast<float>(bits);
}

void FloatReader::get(std::span<float> out) {
  if (remaining_floats() < out.size()) fail(ErrorCode::kFormat, "payload truncated");
  for (float& v : out) v = get();
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

void write_text(const std::string& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kInternal, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

nlohmann::json snr_to_json(double snr_db) {
  if (snr_db == std::numeric_limits<double>::infinity()) return "inf";
  return snr_db;
}

double snr_from_json(const nlohmann::json& value) {
  if (value.is_string() && value.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (value.is_number()) return value.get<double>();
  fail(ErrorCode::kFormat, "SNR must be a number or \"inf\"");
}

}  // namespace gwloc::container
