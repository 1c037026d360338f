#include "docsync/wire/varint.hpp"

namespace docsync::wire {

const char* to_string(WireErrc code) {
  switch (code) {
    case WireErrc::truncated: return "truncated";
    case WireErrc::overflow: return "overflow";
    case WireErrc::unknown_kind: return "unknown_kind";
    case WireErrc::invalid_utf8: return "invalid_utf8";
    case WireErrc::trailing_bytes: return "trailing_bytes";
    case WireErrc::invalid_value: return "invalid_value";
    case WireErrc::id_too_long: return "id_too_long";
    case WireErrc::bad_magic: return "bad_magic";
  }
  return "unknown";
}

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t n) {
  while (n >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(n | 0x80));
    n >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(n));
}

std::vector<std::uint8_t> encode_varint(std::uint64_t n) {
  std::vector<std::uint8_t> out;
  append_varint(out, n);
  return out;
}

VarintResult decode_varint(std::span<const std::uint8_t> bytes) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i == kMaxVarintBytes) {
      throw WireError(WireErrc::overflow, "varint longer than 10 bytes");
    }
    std::uint64_t group = bytes[i] & 0x7F;
    // The tenth byte may only carry the top bit of a 64-bit value.
    if (i == kMaxVarintBytes - 1 && group > 1) {
      throw WireError(WireErrc::overflow, "varint exceeds 64 bits");
    }
    value |= group << (7 * i);
    if ((bytes[i] & 0x80) == 0) {
      return {value, i + 1};
    }
  }
  if (bytes.size() >= kMaxVarintBytes) {
    throw WireError(WireErrc::overflow, "varint longer than 10 bytes");
  }
  throw WireError(WireErrc::truncated, "truncated varint");
}

std::uint8_t ByteReader::byte() {
  if (pos_ >= bytes_.size()) {
    throw WireError(WireErrc::truncated, "unexpected end of input");
  }
  return bytes_[pos_++];
}

std::uint64_t ByteReader::varint() {
  auto [value, used] = decode_varint(bytes_.subspan(pos_));
  pos_ += used;
  return value;
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw WireError(WireErrc::truncated, "unexpected end of input");
  }
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_end() const {
  if (pos_ != bytes_.size()) {
    throw WireError(WireErrc::trailing_bytes, "trailing bytes after payload");
  }
}

}  // namespace docsync::wire
