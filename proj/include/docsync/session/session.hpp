#pragma once

// Client-side communication handler. One Session drives every doclet a user
// has on the page, using one of three transport strategies:
//
//   naive       one shared transport, frames carry no doclet id
//   per_socket  one transport per doclet
//   mux         one shared transport, every frame tagged with its doclet id

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "docsync/doclet.hpp"
#include "docsync/wire/frame.hpp"

namespace docsync {

enum class Strategy { naive, per_socket, mux };

std::string_view to_string(Strategy strategy);
/// Accepts "naive", "per-socket" and "mux".
std::optional<Strategy> parse_strategy(std::string_view text);

/// A message-oriented, full-duplex link. Implementations deliver whole frames.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::vector<std::uint8_t> bytes) = 0;
};

/// Opens transport slot `index`. For per_socket, slot i carries doclet i.
/// Throws on failure.
using TransportFactory = std::function<std::unique_ptr<Transport>(std::size_t index)>;

struct MetricsCounters {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t connections_opened = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t routing_errors = 0;
  std::uint64_t decode_errors = 0;
  /// Second index -> frames sent + received during that second.
  std::map<std::uint64_t, std::uint64_t> per_second;
};

struct InsertChar {
  std::size_t index;
  char32_t ch;
};
struct DeleteChar {
  std::size_t index;
};
using LocalEdit = std::variant<InsertChar, DeleteChar>;

struct SessionConfig {
  std::uint64_t keepalive_ms = 1000;
  /// Upper bound on queued cursor re-broadcasts per doclet view while the
  /// naive resend loop is running.
  std::uint64_t naive_resend_cap_per_view = 4;
  /// Millisecond clock used for metric windows. Defaults to a steady clock.
  std::function<std::uint64_t()> clock;
};

struct TrackingRecord {
  Doclet doclet;
  VersionVector previous_state;
  std::optional<Anchor> previous_cursor;
  std::size_t transport = 0;
};

struct FrameEffects {
  bool decoded = false;
  bool routing_error = false;
  std::optional<wire::FrameKind> kind;
  /// Index of the record the frame was applied to.
  std::optional<std::size_t> record;
  std::size_t ops_applied = 0;
  std::size_t ops_buffered = 0;
  bool awareness_changed = false;
  bool resend_armed = false;
};

/// Globally unique replica id for a user's copy of its `doclet_index`-th
/// doclet. Replica 0 is reserved for the relay.
ReplicaId replica_for(UserId user, std::size_t doclet_index);

class Session {
 public:
  /// Throws std::invalid_argument for an empty or duplicated doclet list, or
  /// whatever the factory throws.
  static Session open(Strategy strategy, UserId user, std::vector<DocletId> doclets,
                      const TransportFactory& factory, SessionConfig config = {});

  Session(Session&&) = default;
  Session& operator=(Session&&) = default;

  /// Applies one keystroke to the active doclet and sends exactly one UPDATE.
  std::size_t on_local_edit(const DocletId& doclet, const LocalEdit& edit);

  /// Places the cursor (activating the doclet). Sends one AWARENESS frame
  /// unless neither the cursor nor the active doclet changed.
  std::size_t on_local_cursor(const DocletId& doclet, std::size_t index);

  FrameEffects on_frame(std::size_t transport, std::span<const std::uint8_t> bytes);

  /// Periodic driver: keepalives on boundary crossings plus, for naive
  /// sessions, the queued cursor re-broadcasts.
  std::size_t tick(std::uint64_t now_ms);

  MetricsCounters snapshot_metrics() const { return metrics_; }

  Strategy strategy() const { return strategy_; }
  UserId user() const { return user_; }
  const DocletId& active_doclet() const { return records_[active_].doclet.id(); }
  std::size_t transport_count() const { return transports_.size(); }
  std::uint64_t naive_backlog() const { return naive_backlog_; }
  bool naive_resend_armed() const { return naive_backlog_ > 0; }

  const std::vector<TrackingRecord>& records() const { return records_; }
  const TrackingRecord& record(const DocletId& doclet) const { return records_[index_of(doclet)]; }
  bool subscribed(const DocletId& doclet) const { return by_id_.contains(doclet); }

 private:
  Session(Strategy strategy, UserId user, SessionConfig config);

  std::size_t index_of(const DocletId& doclet) const;
  std::string tag_for(const TrackingRecord& record) const;
  void send(std::size_t transport, const wire::Frame& frame);
  void count_frame(std::size_t bytes, bool outbound);
  std::uint64_t now() const;
  void arm_naive_resend();

  Strategy strategy_;
  UserId user_;
  SessionConfig config_;
  std::vector<TrackingRecord> records_;
  std::map<DocletId, std::size_t> by_id_;
  std::vector<std::unique_ptr<Transport>> transports_;
  std::size_t active_ = 0;
  std::uint64_t keepalive_slot_ = 0;
  std::uint64_t naive_backlog_ = 0;
  MetricsCounters metrics_;
};

}  // namespace docsync
