#pragma once

// A doclet: one independently collaborated document plus the cursors of the
// users currently looking at it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docsync/crdt/text_doc.hpp"

namespace docsync {

using UserId = std::uint64_t;

/// Validated doclet identifier: 1..=255 bytes of UTF-8.
class DocletId {
 public:
  static constexpr std::size_t kMaxBytes = 255;

  /// Throws std::invalid_argument if `value` is empty, too long or not UTF-8.
  explicit DocletId(std::string value);

  const std::string& str() const { return value_; }

  auto operator<=>(const DocletId&) const = default;

 private:
  std::string value_;
};

struct AwarenessEntry {
  UserId user = 0;
  std::optional<Anchor> anchor;  // nullopt: cursor is not in this doclet
  std::uint64_t last_seen_ms = 0;

  bool operator==(const AwarenessEntry&) const = default;
};

struct AwarenessUpdate {
  bool changed = false;
  /// The incoming anchor did not resolve and was stored as absent.
  bool coerced = false;
};

class Doclet {
 public:
  Doclet(DocletId id, ReplicaId replica) : id_(std::move(id)), doc_(replica) {}

  const DocletId& id() const { return id_; }
  TextDoc& doc() { return doc_; }
  const TextDoc& doc() const { return doc_; }

  /// Last-writer-wins upsert of one user's cursor. `changed` reports whether
  /// the stored anchor moved; last_seen_ms is refreshed regardless.
  AwarenessUpdate apply_awareness(AwarenessEntry entry);

  /// Refreshes last_seen_ms for an existing entry. Returns false if the user
  /// has no entry.
  bool touch_awareness(UserId user, std::uint64_t now_ms);

  /// Drops entries with now_ms - last_seen_ms > ttl_ms.
  std::vector<UserId> expire_awareness(std::uint64_t now_ms, std::uint64_t ttl_ms);

  const std::map<UserId, AwarenessEntry>& awareness() const { return awareness_; }
  const AwarenessEntry* awareness_of(UserId user) const;

 private:
  DocletId id_;
  TextDoc doc_;
  std::map<UserId, AwarenessEntry> awareness_;
};

inline constexpr std::uint64_t kDefaultAwarenessTtlMs = 30000;

}  // namespace docsync
