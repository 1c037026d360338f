#pragma once

// Operation-based sequence CRDT (RGA) over Unicode scalar values.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace docsync {

using ReplicaId = std::uint64_t;

struct OpId {
  ReplicaId replica = 0;
  std::uint64_t seq = 0;

  auto operator<=>(const OpId&) const = default;
};

struct OpIdHash {
  std::size_t operator()(const OpId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.replica * 0x9E3779B97F4A7C15ULL ^ id.seq);
  }
};

/// Either the document head or a specific insert element.
class Anchor {
 public:
  Anchor() = default;
  static Anchor head() { return Anchor{}; }
  static Anchor at(OpId id) { return Anchor{id}; }

  bool is_head() const { return !element_; }
  const OpId& element() const { return *element_; }

  bool operator==(const Anchor&) const = default;

 private:
  explicit Anchor(OpId id) : element_(id) {}
  std::optional<OpId> element_;
};

struct InsertOp {
  OpId id;
  std::uint64_t lamport = 0;
  Anchor origin;
  char32_t codepoint = 0;

  bool operator==(const InsertOp&) const = default;
};

struct DeleteOp {
  OpId id;
  OpId target;

  bool operator==(const DeleteOp&) const = default;
};

using Op = std::variant<InsertOp, DeleteOp>;

inline const OpId& op_id(const Op& op) {
  return std::visit([](const auto& o) -> const OpId& { return o.id; }, op);
}

/// Highest contiguous seq integrated per replica. Absent replicas read as 0
/// and zero entries are never stored, so equality is structural.
class VersionVector {
 public:
  std::uint64_t get(ReplicaId replica) const;
  void set(ReplicaId replica, std::uint64_t seq);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<ReplicaId, std::uint64_t>& entries() const { return entries_; }

  /// True if every entry of `other` is covered by this vector.
  bool dominates(const VersionVector& other) const;

  bool operator==(const VersionVector&) const = default;

 private:
  std::map<ReplicaId, std::uint64_t> entries_;
};

enum class IntegrationResult { applied, buffered, duplicate };

class TextDoc {
 public:
  struct Element {
    InsertOp op;
    bool deleted = false;
  };

  explicit TextDoc(ReplicaId replica);

  ReplicaId replica() const { return replica_; }
  const VersionVector& version() const { return version_; }
  std::uint64_t lamport_clock() const { return lamport_; }

  /// Number of visible (non-deleted) characters.
  std::size_t length() const { return visible_count_; }
  std::size_t element_count() const { return elements_.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  const std::vector<Op>& pending() const { return pending_; }
  const std::vector<Element>& elements() const { return elements_; }

  /// Inserts `ch` so that it ends up at visible position `index`.
  /// Throws std::out_of_range unless index <= length().
  InsertOp local_insert(std::size_t index, char32_t ch);

  /// Tombstones the visible character at `index`.
  /// Throws std::out_of_range unless index < length().
  DeleteOp local_delete(std::size_t index);

  IntegrationResult integrate(const Op& op);

  std::u32string visible_codepoints() const;
  /// Visible text encoded as UTF-8.
  std::string visible_text() const;

  /// Every integrated op (r, s) with s > since[r], in integration order, so
  /// each op's dependencies inside the list come before it.
  std::vector<Op> ops_since(const VersionVector& since) const;

  /// All integrated ops, in integration order.
  std::vector<Op> all_ops() const { return ops_since(VersionVector{}); }

  bool has_op(const OpId& id) const { return oplog_.contains(id); }
  /// Integrated op with this id, or nullptr.
  const Op* find_op(const OpId& id) const;
  bool has_insert(const OpId& id) const { return element_ids_.contains(id); }
  /// HEAD or a known insert.
  bool resolvable(const Anchor& anchor) const;

  Anchor index_to_anchor(std::size_t index) const;
  /// Throws std::out_of_range for an unknown element.
  std::size_t anchor_to_index(const Anchor& anchor) const;

 private:
  bool ready(const Op& op) const;
  void apply(const Op& op);
  void apply_insert(const InsertOp& op);
  void apply_delete(const DeleteOp& op);
  void drain_pending();
  std::size_t position_of(const OpId& id) const;
  std::size_t visible_to_position(std::size_t index) const;

  ReplicaId replica_;
  std::uint64_t lamport_ = 0;
  std::size_t visible_count_ = 0;
  std::vector<Element> elements_;
  std::unordered_set<OpId, OpIdHash> element_ids_;
  std::vector<Op> pending_;
  std::map<OpId, Op> oplog_;
  std::vector<OpId> integration_order_;
  VersionVector version_;
};

/// UTF-8 helpers shared by the CRDT and the wire codec.
bool is_scalar_value(char32_t cp);
std::string to_utf8(std::u32string_view text);
/// Throws std::invalid_argument on malformed UTF-8.
std::u32string from_utf8(std::string_view text);
bool valid_utf8(std::string_view text);

}  // namespace docsync
