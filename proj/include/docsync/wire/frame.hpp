#pragma once

// Frame layout (one frame per transport message):
//
//   [kind: 1 byte][doclet-id length: varint][doclet-id: UTF-8][payload]
//
// An empty doclet id is legal on the wire; it is what an untagged
// (single-state) client sends.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "docsync/crdt/text_doc.hpp"
#include "docsync/doclet.hpp"
#include "docsync/wire/varint.hpp"

namespace docsync::wire {

enum class FrameKind : std::uint8_t {
  subscribe = 0x01,
  sync_req = 0x02,
  update = 0x03,
  awareness = 0x04,
  unsubscribe = 0x05,
  keepalive = 0x06,
};

const char* to_string(FrameKind kind);

struct SyncRequest {
  VersionVector version;
  bool operator==(const SyncRequest&) const = default;
};

struct Update {
  std::vector<Op> ops;
  bool operator==(const Update&) const = default;
};

struct Awareness {
  UserId user = 0;
  std::optional<Anchor> anchor;  // nullopt encodes ABSENT
  bool operator==(const Awareness&) const = default;
};

using Payload = std::variant<std::monostate, SyncRequest, Update, Awareness>;

struct Frame {
  FrameKind kind = FrameKind::keepalive;
  std::string doclet;
  Payload payload;

  static Frame subscribe(std::string doclet);
  static Frame unsubscribe(std::string doclet);
  static Frame keepalive(std::string doclet);
  static Frame sync_req(std::string doclet, VersionVector version);
  static Frame update(std::string doclet, std::vector<Op> ops);
  static Frame awareness(std::string doclet, UserId user, std::optional<Anchor> anchor);

  bool operator==(const Frame&) const = default;
};

/// Throws WireError{id_too_long} for ids over 255 bytes and
/// WireError{invalid_value} when the payload does not match the kind.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Exact inverse of encode_frame. Throws WireError.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Op-list codec shared by UPDATE payloads and snapshots.
void append_ops(std::vector<std::uint8_t>& out, std::span<const Op> ops);
std::vector<Op> read_ops(ByteReader& in);

}  // namespace docsync::wire
