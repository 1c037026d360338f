#include "docsync/wire/frame.hpp"

namespace docsync::wire {

namespace {

constexpr std::uint8_t kOpInsert = 0;
constexpr std::uint8_t kOpDelete = 1;

constexpr std::uint8_t kAnchorHead = 0;
constexpr std::uint8_t kAnchorElement = 1;

constexpr std::uint8_t kCursorAbsent = 0;
constexpr std::uint8_t kCursorHead = 1;
constexpr std::uint8_t kCursorElement = 2;

void append_op_id(std::vector<std::uint8_t>& out, const OpId& id) {
  append_varint(out, id.replica);
  append_varint(out, id.seq);
}

OpId read_op_id(ByteReader& in) {
  OpId id;
  id.replica = in.varint();
  id.seq = in.varint();
  if (id.seq == 0) {
    throw WireError(WireErrc::invalid_value, "op seq must start at 1");
  }
  return id;
}

void append_anchor(std::vector<std::uint8_t>& out, const Anchor& anchor) {
  if (anchor.is_head()) {
    out.push_back(kAnchorHead);
  } else {
    out.push_back(kAnchorElement);
    append_op_id(out, anchor.element());
  }
}

Anchor read_anchor(ByteReader& in) {
  switch (in.byte()) {
    case kAnchorHead: return Anchor::head();
    case kAnchorElement: return Anchor::at(read_op_id(in));
    default: throw WireError(WireErrc::invalid_value, "bad anchor tag");
  }
}

void check_payload(const Frame& f) {
  bool ok = false;
  switch (f.kind) {
    case FrameKind::subscribe:
    case FrameKind::unsubscribe:
    case FrameKind::keepalive:
      ok = std::holds_alternative<std::monostate>(f.payload);
      break;
    case FrameKind::sync_req: ok = std::holds_alternative<SyncRequest>(f.payload); break;
    case FrameKind::update: ok = std::holds_alternative<Update>(f.payload); break;
    case FrameKind::awareness: ok = std::holds_alternative<Awareness>(f.payload); break;
  }
  if (!ok) {
    throw WireError(WireErrc::invalid_value, "payload does not match frame kind");
  }
}

}  // namespace

const char* to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::subscribe: return "SUBSCRIBE";
    case FrameKind::sync_req: return "SYNC_REQ";
    case FrameKind::update: return "UPDATE";
    case FrameKind::awareness: return "AWARENESS";
    case FrameKind::unsubscribe: return "UNSUBSCRIBE";
    case FrameKind::keepalive: return "KEEPALIVE";
  }
  return "?";
}

Frame Frame::subscribe(std::string doclet) {
  return Frame{FrameKind::subscribe, std::move(doclet), std::monostate{}};
}

Frame Frame::unsubscribe(std::string doclet) {
  return Frame{FrameKind::unsubscribe, std::move(doclet), std::monostate{}};
}

Frame Frame::keepalive(std::string doclet) {
  return Frame{FrameKind::keepalive, std::move(doclet), std::monostate{}};
}

Frame Frame::sync_req(std::string doclet, VersionVector version) {
  return Frame{FrameKind::sync_req, std::move(doclet), SyncRequest{std::move(version)}};
}

Frame Frame::update(std::string doclet, std::vector<Op> ops) {
  return Frame{FrameKind::update, std::move(doclet), Update{std::move(ops)}};
}

Frame Frame::awareness(std::string doclet, UserId user, std::optional<Anchor> anchor) {
  return Frame{FrameKind::awareness, std::move(doclet), Awareness{user, anchor}};
}

void append_ops(std::vector<std::uint8_t>& out, std::span<const Op> ops) {
  append_varint(out, ops.size());
  for (const Op& op : ops) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) {
      out.push_back(kOpInsert);
      append_op_id(out, ins->id);
      append_varint(out, ins->lamport);
      append_anchor(out, ins->origin);
      append_varint(out, ins->codepoint);
    } else {
      const auto& del = std::get<DeleteOp>(op);
      out.push_back(kOpDelete);
      append_op_id(out, del.id);
      append_op_id(out, del.target);
    }
  }
}

std::vector<Op> read_ops(ByteReader& in) {
  std::uint64_t count = in.varint();
  // Every op takes at least 4 bytes; reject counts the input cannot hold.
  if (count > in.remaining() / 4) {
    throw WireError(WireErrc::truncated, "op count exceeds input");
  }
  std::vector<Op> ops;
  ops.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    switch (in.byte()) {
      case kOpInsert: {
        InsertOp op;
        op.id = read_op_id(in);
        op.lamport = in.varint();
        op.origin = read_anchor(in);
        std::uint64_t cp = in.varint();
        if (cp > 0x10FFFF || !is_scalar_value(static_cast<char32_t>(cp))) {
          throw WireError(WireErrc::invalid_value, "codepoint is not a Unicode scalar");
        }
        op.codepoint = static_cast<char32_t>(cp);
        ops.emplace_back(op);
        break;
      }
      case kOpDelete: {
        DeleteOp op;
        op.id = read_op_id(in);
        op.target = read_op_id(in);
        ops.emplace_back(op);
        break;
      }
      default:
        throw WireError(WireErrc::invalid_value, "bad op kind");
    }
  }
  return ops;
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.doclet.size() > DocletId::kMaxBytes) {
    throw WireError(WireErrc::id_too_long, "doclet id longer than 255 bytes");
  }
  check_payload(f);

  std::vector<std::uint8_t> out;
  out.reserve(2 + f.doclet.size());
  out.push_back(static_cast<std::uint8_t>(f.kind));
  append_varint(out, f.doclet.size());
  out.insert(out.end(), f.doclet.begin(), f.doclet.end());

  if (const auto* sync = std::get_if<SyncRequest>(&f.payload)) {
    append_varint(out, sync->version.size());
    for (const auto& [replica, seq] : sync->version.entries()) {
      append_varint(out, replica);
      append_varint(out, seq);
    }
  } else if (const auto* upd = std::get_if<Update>(&f.payload)) {
    append_ops(out, upd->ops);
  } else if (const auto* aw = std::get_if<Awareness>(&f.payload)) {
    append_varint(out, aw->user);
    if (!aw->anchor) {
      out.push_back(kCursorAbsent);
    } else if (aw->anchor->is_head()) {
      out.push_back(kCursorHead);
    } else {
      out.push_back(kCursorElement);
      append_op_id(out, aw->anchor->element());
    }
  }
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  Frame f;
  std::uint8_t kind = in.byte();
  if (kind < 0x01 || kind > 0x06) {
    throw WireError(WireErrc::unknown_kind, "unknown frame kind");
  }
  f.kind = static_cast<FrameKind>(kind);

  std::uint64_t id_len = in.varint();
  if (id_len > DocletId::kMaxBytes) {
    throw WireError(WireErrc::id_too_long, "doclet id longer than 255 bytes");
  }
  auto id = in.take(static_cast<std::size_t>(id_len));
  f.doclet.assign(id.begin(), id.end());
  if (!valid_utf8(f.doclet)) {
    throw WireError(WireErrc::invalid_utf8, "doclet id is not valid UTF-8");
  }

  switch (f.kind) {
    case FrameKind::subscribe:
    case FrameKind::unsubscribe:
    case FrameKind::keepalive:
      f.payload = std::monostate{};
      break;
    case FrameKind::sync_req: {
      std::uint64_t count = in.varint();
      if (count > in.remaining() / 2) {
        throw WireError(WireErrc::truncated, "entry count exceeds input");
      }
      SyncRequest req;
      for (std::uint64_t i = 0; i < count; ++i) {
        ReplicaId replica = in.varint();
        std::uint64_t seq = in.varint();
        if (seq == 0 || req.version.get(replica) != 0) {
          throw WireError(WireErrc::invalid_value, "zero or repeated version entry");
        }
        req.version.set(replica, seq);
      }
      f.payload = std::move(req);
      break;
    }
    case FrameKind::update:
      f.payload = Update{read_ops(in)};
      break;
    case FrameKind::awareness: {
      Awareness aw;
      aw.user = in.varint();
      switch (in.byte()) {
        case kCursorAbsent: break;
        case kCursorHead: aw.anchor = Anchor::head(); break;
        case kCursorElement: aw.anchor = Anchor::at(read_op_id(in)); break;
        default: throw WireError(WireErrc::invalid_value, "bad cursor tag");
      }
      f.payload = aw;
      break;
    }
  }
  in.expect_end();
  return f;
}

}  // namespace docsync::wire
