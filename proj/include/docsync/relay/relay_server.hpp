#pragma once

// Transport-agnostic relay core. Carriers call handle_connect / handle_frame /
// handle_disconnect and deliver the returned outbound frames. All calls on
// one RelayServer must be serialized by the caller.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "docsync/doclet.hpp"
#include "docsync/wire/frame.hpp"

namespace docsync::relay {

using ConnId = std::uint64_t;

/// Replica id of the relay's own copy of each doclet; it never generates ops.
inline constexpr ReplicaId kServerReplica = 0;

struct RelayConfig {
  /// Hub that receives frames with an empty doclet id. When unset, the first
  /// hub created is used.
  std::optional<std::string> default_doclet;
  std::uint64_t awareness_ttl_ms = kDefaultAwarenessTtlMs;
};

struct DocletHub {
  explicit DocletHub(DocletId id) : doclet(std::move(id), kServerReplica) {}

  Doclet doclet;
  std::set<ConnId> subscribers;
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
};

struct ConnectionRecord {
  ConnId id = 0;
  std::optional<UserId> user;
  std::set<std::string> subscribed;
};

struct Outbound {
  ConnId conn;
  std::shared_ptr<const std::vector<std::uint8_t>> bytes;
};

struct RelayMetrics {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t routing_errors = 0;
  std::uint64_t decode_errors = 0;
  /// Ops whose replica had already written to a different hub.
  std::uint64_t contamination = 0;
};

class RelayServer {
 public:
  explicit RelayServer(RelayConfig config = {});

  ConnId handle_connect(std::optional<UserId> user = std::nullopt);
  void handle_disconnect(ConnId conn);

  std::vector<Outbound> handle_frame(ConnId conn, std::span<const std::uint8_t> bytes,
                                     std::uint64_t now_ms = 0);

  /// Expires stale cursors in every hub; returns how many were dropped.
  std::size_t expire_awareness(std::uint64_t now_ms);

  /// Throws std::out_of_range for an unknown hub.
  std::vector<std::uint8_t> snapshot(const std::string& doclet) const;
  /// Installs (or replaces) the hub encoded in `bytes`. Throws wire::WireError.
  const DocletHub& restore(std::span<const std::uint8_t> bytes);

  const DocletHub* hub(const std::string& doclet) const;
  std::vector<std::string> hub_ids() const;
  const ConnectionRecord* connection(ConnId conn) const;
  std::size_t connection_count() const { return connections_.size(); }

  const RelayMetrics& metrics() const { return metrics_; }
  /// Plain-text counters, one `name value` pair per line.
  std::string metrics_text() const;

 private:
  DocletHub& hub_for(const std::string& doclet);
  DocletHub* find_hub(const std::string& doclet);
  std::string route(const std::string& tag);
  void broadcast(DocletHub& hub, ConnId except, const std::shared_ptr<const std::vector<std::uint8_t>>& bytes,
                 std::vector<Outbound>& out);
  void track_replicas(const std::string& hub_id, std::span<const Op> ops);

  RelayConfig config_;
  ConnId next_conn_ = 1;
  std::map<ConnId, ConnectionRecord> connections_;
  std::map<std::string, std::unique_ptr<DocletHub>> hubs_;
  std::optional<std::string> first_hub_;
  std::map<ReplicaId, std::string> replica_home_;
  RelayMetrics metrics_;
};

// Snapshot file format:
//   "DSN1" | varint id length | id | varint op count | ops
// with ops in ascending (lamport, replica) order for inserts followed by
// deletes in (replica, seq) order, each encoded as in an UPDATE payload.
inline constexpr char kSnapshotMagic[4] = {'D', 'S', 'N', '1'};

std::vector<std::uint8_t> encode_snapshot(const Doclet& doclet);
/// Rebuilds the hub state. Throws wire::WireError{bad_magic | truncated | ...}.
std::unique_ptr<DocletHub> decode_snapshot(std::span<const std::uint8_t> bytes);

}  // namespace docsync::relay
