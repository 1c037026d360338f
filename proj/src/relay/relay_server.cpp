#include "docsync/relay/relay_server.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace docsync::relay {

using wire::Frame;
using wire::FrameKind;

namespace {

constexpr const char* kFallbackDefault = "default";

}  // namespace

RelayServer::RelayServer(RelayConfig config) : config_(std::move(config)) {}

ConnId RelayServer::handle_connect(std::optional<UserId> user) {
  ConnId id = next_conn_++;
  connections_.emplace(id, ConnectionRecord{id, user, {}});
  return id;
}

void RelayServer::handle_disconnect(ConnId conn) {
  auto it = connections_.find(conn);
  if (it == connections_.end()) {
    return;
  }
  for (const auto& doclet : it->second.subscribed) {
    if (auto* hub = find_hub(doclet)) {
      hub->subscribers.erase(conn);
    }
  }
  connections_.erase(it);
}

DocletHub* RelayServer::find_hub(const std::string& doclet) {
  auto it = hubs_.find(doclet);
  return it == hubs_.end() ? nullptr : it->second.get();
}

const DocletHub* RelayServer::hub(const std::string& doclet) const {
  auto it = hubs_.find(doclet);
  return it == hubs_.end() ? nullptr : it->second.get();
}

std::vector<std::string> RelayServer::hub_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : hubs_) {
    ids.push_back(id);
  }
  return ids;
}

const ConnectionRecord* RelayServer::connection(ConnId conn) const {
  auto it = connections_.find(conn);
  return it == connections_.end() ? nullptr : &it->second;
}

DocletHub& RelayServer::hub_for(const std::string& doclet) {
  if (auto* existing = find_hub(doclet)) {
    return *existing;
  }
  auto [it, _] = hubs_.emplace(doclet, std::make_unique<DocletHub>(DocletId(doclet)));
  if (!first_hub_) {
    first_hub_ = doclet;
  }
  return *it->second;
}

std::string RelayServer::route(const std::string& tag) {
  if (!tag.empty()) {
    return tag;
  }
  // Untagged frames carry no hint of their doclet; all of them go to one hub.
  if (config_.default_doclet) {
    return *config_.default_doclet;
  }
  return first_hub_ ? *first_hub_ : kFallbackDefault;
}

void RelayServer::broadcast(DocletHub& hub, ConnId except,
                            const std::shared_ptr<const std::vector<std::uint8_t>>& bytes,
                            std::vector<Outbound>& out) {
  for (ConnId sub : hub.subscribers) {
    if (sub != except) {
      out.push_back(Outbound{sub, bytes});
      ++hub.frames_out;
      ++metrics_.frames_out;
    }
  }
}

void RelayServer::track_replicas(const std::string& hub_id, std::span<const Op> ops) {
  for (const Op& op : ops) {
    ReplicaId replica = op_id(op).replica;
    auto [it, inserted] = replica_home_.emplace(replica, hub_id);
    if (!inserted && it->second != hub_id) {
      ++metrics_.contamination;
    }
  }
}

std::vector<Outbound> RelayServer::handle_frame(ConnId conn, std::span<const std::uint8_t> bytes,
                                                std::uint64_t now_ms) {
  auto cit = connections_.find(conn);
  if (cit == connections_.end()) {
    throw std::invalid_argument("frame on unknown connection");
  }
  ConnectionRecord& record = cit->second;
  ++metrics_.frames_in;

  Frame frame;
  try {
    frame = wire::decode_frame(bytes);
  } catch (const wire::WireError&) {
    ++metrics_.decode_errors;
    return {};
  }

  std::vector<Outbound> out;
  std::string target = route(frame.doclet);

  if (frame.kind == FrameKind::subscribe) {
    DocletHub& hub = hub_for(target);
    ++hub.frames_in;
    hub.subscribers.insert(conn);
    record.subscribed.insert(target);
    return out;
  }

  DocletHub* hub = find_hub(target);
  if (hub == nullptr) {
    ++metrics_.routing_errors;
    return out;
  }
  ++hub->frames_in;

  switch (frame.kind) {
    case FrameKind::subscribe:
      break;
    case FrameKind::sync_req: {
      const auto& req = std::get<wire::SyncRequest>(frame.payload);
      auto ops = hub->doclet.doc().ops_since(req.version);
      if (!ops.empty()) {
        auto reply = std::make_shared<const std::vector<std::uint8_t>>(
            wire::encode_frame(Frame::update(frame.doclet, std::move(ops))));
        out.push_back(Outbound{conn, reply});
        ++hub->frames_out;
        ++metrics_.frames_out;
      }
      break;
    }
    case FrameKind::update: {
      const auto& upd = std::get<wire::Update>(frame.payload);
      for (const Op& op : upd.ops) {
        hub->doclet.doc().integrate(op);
      }
      track_replicas(target, upd.ops);
      broadcast(*hub, conn, std::make_shared<const std::vector<std::uint8_t>>(bytes.begin(), bytes.end()),
                out);
      break;
    }
    case FrameKind::awareness: {
      const auto& aw = std::get<wire::Awareness>(frame.payload);
      if (!record.user) {
        record.user = aw.user;
      }
      hub->doclet.apply_awareness(AwarenessEntry{aw.user, aw.anchor, now_ms});
      broadcast(*hub, conn, std::make_shared<const std::vector<std::uint8_t>>(bytes.begin(), bytes.end()),
                out);
      break;
    }
    case FrameKind::unsubscribe:
      hub->subscribers.erase(conn);
      record.subscribed.erase(target);
      break;
    case FrameKind::keepalive:
      if (record.user) {
        hub->doclet.touch_awareness(*record.user, now_ms);
      }
      break;
  }
  return out;
}

std::size_t RelayServer::expire_awareness(std::uint64_t now_ms) {
  std::size_t removed = 0;
  for (auto& [_, hub] : hubs_) {
    removed += hub->doclet.expire_awareness(now_ms, config_.awareness_ttl_ms).size();
  }
  return removed;
}

std::vector<std::uint8_t> RelayServer::snapshot(const std::string& doclet) const {
  const DocletHub* h = hub(doclet);
  if (h == nullptr) {
    throw std::out_of_range("no such doclet: " + doclet);
  }
  return encode_snapshot(h->doclet);
}

const DocletHub& RelayServer::restore(std::span<const std::uint8_t> bytes) {
  auto restored = decode_snapshot(bytes);
  std::string id = restored->doclet.id().str();
  for (const Op& op : restored->doclet.doc().all_ops()) {
    replica_home_.emplace(op_id(op).replica, id);
  }
  auto& slot = hubs_[id];
  if (slot) {
    restored->subscribers = std::move(slot->subscribers);
  }
  slot = std::move(restored);
  if (!first_hub_) {
    first_hub_ = id;
  }
  return *slot;
}

std::string RelayServer::metrics_text() const {
  std::ostringstream out;
  out << "frames_in " << metrics_.frames_in << '\n';
  out << "frames_out " << metrics_.frames_out << '\n';
  out << "routing_errors " << metrics_.routing_errors << '\n';
  out << "decode_errors " << metrics_.decode_errors << '\n';
  out << "contamination " << metrics_.contamination << '\n';
  out << "connections " << connections_.size() << '\n';
  for (const auto& [id, hub] : hubs_) {
    out << "frames_in{doclet=\"" << id << "\"} " << hub->frames_in << '\n';
    out << "frames_out{doclet=\"" << id << "\"} " << hub->frames_out << '\n';
    out << "subscribers{doclet=\"" << id << "\"} " << hub->subscribers.size() << '\n';
  }
  return out.str();
}

std::vector<std::uint8_t> encode_snapshot(const Doclet& doclet) {
  std::vector<InsertOp> inserts;
  std::vector<DeleteOp> deletes;
  for (const Op& op : doclet.doc().all_ops()) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) {
      inserts.push_back(*ins);
    } else {
      deletes.push_back(std::get<DeleteOp>(op));
    }
  }
  std::sort(inserts.begin(), inserts.end(), [](const InsertOp& a, const InsertOp& b) {
    return std::tie(a.lamport, a.id.replica) < std::tie(b.lamport, b.id.replica);
  });
  std::sort(deletes.begin(), deletes.end(),
            [](const DeleteOp& a, const DeleteOp& b) { return a.id < b.id; });

  std::vector<Op> ops(inserts.begin(), inserts.end());
  ops.insert(ops.end(), deletes.begin(), deletes.end());

  std::vector<std::uint8_t> out(std::begin(kSnapshotMagic), std::end(kSnapshotMagic));
  const std::string& id = doclet.id().str();
  wire::append_varint(out, id.size());
  out.insert(out.end(), id.begin(), id.end());
  wire::append_ops(out, ops);
  return out;
}

std::unique_ptr<DocletHub> decode_snapshot(std::span<const std::uint8_t> bytes) {
  wire::ByteReader in(bytes);
  auto magic = in.take(sizeof(kSnapshotMagic));
  if (!std::equal(magic.begin(), magic.end(), std::begin(kSnapshotMagic))) {
    throw wire::WireError(wire::WireErrc::bad_magic, "not a DSN1 snapshot");
  }
  std::uint64_t id_len = in.varint();
  if (id_len == 0 || id_len > DocletId::kMaxBytes) {
    throw wire::WireError(wire::WireErrc::invalid_value, "bad doclet id length");
  }
  auto id_bytes = in.take(static_cast<std::size_t>(id_len));
  std::string id(id_bytes.begin(), id_bytes.end());
  if (!valid_utf8(id)) {
    throw wire::WireError(wire::WireErrc::invalid_utf8, "doclet id is not valid UTF-8");
  }
  auto ops = wire::read_ops(in);
  in.expect_end();

  auto hub = std::make_unique<DocletHub>(DocletId(id));
  for (const Op& op : ops) {
    hub->doclet.doc().integrate(op);
  }
  if (hub->doclet.doc().pending_count() != 0) {
    throw wire::WireError(wire::WireErrc::invalid_value, "snapshot ops are not causally closed");
  }
  return hub;
}

}  // namespace docsync::relay
