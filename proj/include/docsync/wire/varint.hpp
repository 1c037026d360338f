#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace docsync::wire {

enum class WireErrc {
  truncated,
  overflow,
  unknown_kind,
  invalid_utf8,
  trailing_bytes,
  invalid_value,
  id_too_long,
  bad_magic,
};

const char* to_string(WireErrc code);

class WireError : public std::runtime_error {
 public:
  WireError(WireErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  WireErrc code() const { return code_; }

 private:
  WireErrc code_;
};

// Unsigned LEB128: 7 data bits per byte, low group first, high bit set on
// every byte except the last.
inline constexpr std::size_t kMaxVarintBytes = 10;

void append_varint(std::vector<std::uint8_t>& out, std::uint64_t n);
std::vector<std::uint8_t> encode_varint(std::uint64_t n);

struct VarintResult {
  std::uint64_t value;
  std::size_t consumed;
};

/// Throws WireError{truncated} or WireError{overflow}.
VarintResult decode_varint(std::span<const std::uint8_t> bytes);

/// Sequential reader over a byte span; every read throws WireError on
/// truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t byte();
  std::uint64_t varint();
  std::span<const std::uint8_t> take(std::size_t n);

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const;

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace docsync::wire
