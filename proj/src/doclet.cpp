#include "docsync/doclet.hpp"

#include <stdexcept>

namespace docsync {

DocletId::DocletId(std::string value) : value_(std::move(value)) {
  if (value_.empty() || value_.size() > kMaxBytes) {
    throw std::invalid_argument("doclet id must be 1..255 bytes");
  }
  if (!valid_utf8(value_)) {
    throw std::invalid_argument("doclet id is not valid UTF-8");
  }
}

AwarenessUpdate Doclet::apply_awareness(AwarenessEntry entry) {
  AwarenessUpdate result;
  if (entry.anchor && !doc_.resolvable(*entry.anchor)) {
    entry.anchor.reset();
    result.coerced = true;
  }
  auto it = awareness_.find(entry.user);
  if (it == awareness_.end()) {
    awareness_.emplace(entry.user, entry);
    result.changed = true;
    return result;
  }
  result.changed = it->second.anchor != entry.anchor;
  it->second = entry;
  return result;
}

bool Doclet::touch_awareness(UserId user, std::uint64_t now_ms) {
  auto it = awareness_.find(user);
  if (it == awareness_.end()) {
    return false;
  }
  it->second.last_seen_ms = now_ms;
  return true;
}

std::vector<UserId> Doclet::expire_awareness(std::uint64_t now_ms, std::uint64_t ttl_ms) {
  if (ttl_ms == 0) {
    throw std::invalid_argument("awareness ttl must be positive");
  }
  std::vector<UserId> removed;
  for (auto it = awareness_.begin(); it != awareness_.end();) {
    const auto& e = it->second;
    if (now_ms > e.last_seen_ms && now_ms - e.last_seen_ms > ttl_ms) {
      removed.push_back(it->first);
      it = awareness_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

const AwarenessEntry* Doclet::awareness_of(UserId user) const {
  auto it = awareness_.find(user);
  return it == awareness_.end() ? nullptr : &it->second;
}

}  // namespace docsync
