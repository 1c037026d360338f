#include "docsync/crdt/text_doc.hpp"

#include <algorithm>
#include <tuple>

namespace docsync {

std::uint64_t VersionVector::get(ReplicaId replica) const {
  auto it = entries_.find(replica);
  return it == entries_.end() ? 0 : it->second;
}

void VersionVector::set(ReplicaId replica, std::uint64_t seq) {
  if (seq == 0) {
    entries_.erase(replica);
  } else {
    entries_[replica] = seq;
  }
}

bool VersionVector::dominates(const VersionVector& other) const {
  return std::all_of(other.entries_.begin(), other.entries_.end(),
                     [this](const auto& e) { return get(e.first) >= e.second; });
}

namespace {

auto order_key(const InsertOp& op) { return std::tuple(op.lamport, op.id.replica); }

}  // namespace

TextDoc::TextDoc(ReplicaId replica) : replica_(replica) {}

InsertOp TextDoc::local_insert(std::size_t index, char32_t ch) {
  if (index > visible_count_) {
    throw std::out_of_range("insert index out of range");
  }
  if (!is_scalar_value(ch)) {
    throw std::invalid_argument("not a Unicode scalar value");
  }
  InsertOp op{OpId{replica_, version_.get(replica_) + 1}, lamport_ + 1, index_to_anchor(index), ch};
  apply(op);
  return op;
}

DeleteOp TextDoc::local_delete(std::size_t index) {
  if (index >= visible_count_) {
    throw std::out_of_range("delete index out of range");
  }
  DeleteOp op{OpId{replica_, version_.get(replica_) + 1},
              elements_[visible_to_position(index)].op.id};
  apply(op);
  return op;
}

IntegrationResult TextDoc::integrate(const Op& op) {
  const OpId& id = op_id(op);
  if (id.seq <= version_.get(id.replica)) {
    return IntegrationResult::duplicate;
  }
  if (std::any_of(pending_.begin(), pending_.end(),
                  [&](const Op& p) { return op_id(p) == id; })) {
    return IntegrationResult::duplicate;
  }
  if (!ready(op)) {
    pending_.push_back(op);
    return IntegrationResult::buffered;
  }
  apply(op);
  drain_pending();
  return IntegrationResult::applied;
}

bool TextDoc::ready(const Op& op) const {
  const OpId& id = op_id(op);
  if (id.seq != version_.get(id.replica) + 1) {
    return false;
  }
  if (const auto* ins = std::get_if<InsertOp>(&op)) {
    return ins->origin.is_head() || has_insert(ins->origin.element());
  }
  return has_insert(std::get<DeleteOp>(op).target);
}

void TextDoc::apply(const Op& op) {
  if (const auto* ins = std::get_if<InsertOp>(&op)) {
    apply_insert(*ins);
  } else {
    apply_delete(std::get<DeleteOp>(op));
  }
  const OpId& id = op_id(op);
  version_.set(id.replica, id.seq);
  oplog_.emplace(id, op);
  integration_order_.push_back(id);
}

void TextDoc::apply_insert(const InsertOp& op) {
  std::size_t pos = op.origin.is_head() ? 0 : position_of(op.origin.element()) + 1;
  // Concurrent siblings with a greater key (and their descendants, whose
  // keys are greater still) stay closer to the origin.
  while (pos < elements_.size() && order_key(elements_[pos].op) > order_key(op)) {
    ++pos;
  }
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(pos), Element{op, false});
  element_ids_.insert(op.id);
  ++visible_count_;
  lamport_ = std::max(lamport_, op.lamport);
}

void TextDoc::apply_delete(const DeleteOp& op) {
  Element& e = elements_[position_of(op.target)];
  if (!e.deleted) {
    e.deleted = true;
    --visible_count_;
  }
}

void TextDoc::drain_pending() {
  bool progress = true;
  while (progress && !pending_.empty()) {
    progress = false;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (ready(pending_[i])) {
        Op op = std::move(pending_[i]);
        pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(i));
        apply(op);
        progress = true;
        break;
      }
    }
  }
}

std::size_t TextDoc::position_of(const OpId& id) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].op.id == id) {
      return i;
    }
  }
  throw std::out_of_range("unknown element");
}

std::size_t TextDoc::visible_to_position(std::size_t index) const {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].deleted) {
      continue;
    }
    if (seen == index) {
      return i;
    }
    ++seen;
  }
  throw std::out_of_range("visible index out of range");
}

std::u32string TextDoc::visible_codepoints() const {
  std::u32string out;
  out.reserve(visible_count_);
  for (const auto& e : elements_) {
    if (!e.deleted) {
      out.push_back(e.op.codepoint);
    }
  }
  return out;
}

std::string TextDoc::visible_text() const { return to_utf8(visible_codepoints()); }

std::vector<Op> TextDoc::ops_since(const VersionVector& since) const {
  std::vector<Op> out;
  for (const OpId& id : integration_order_) {
    if (id.seq > since.get(id.replica)) {
      out.push_back(oplog_.at(id));
    }
  }
  return out;
}

const Op* TextDoc::find_op(const OpId& id) const {
  auto it = oplog_.find(id);
  return it == oplog_.end() ? nullptr : &it->second;
}

bool TextDoc::resolvable(const Anchor& anchor) const {
  return anchor.is_head() || has_insert(anchor.element());
}

Anchor TextDoc::index_to_anchor(std::size_t index) const {
  if (index > visible_count_) {
    throw std::out_of_range("cursor index out of range");
  }
  if (index == 0) {
    return Anchor::head();
  }
  return Anchor::at(elements_[visible_to_position(index - 1)].op.id);
}

std::size_t TextDoc::anchor_to_index(const Anchor& anchor) const {
  if (anchor.is_head()) {
    return 0;
  }
  std::size_t visible = 0;
  for (const auto& e : elements_) {
    if (!e.deleted) {
      ++visible;
    }
    if (e.op.id == anchor.element()) {
      return visible;
    }
  }
  throw std::out_of_range("unknown anchor element");
}

bool is_scalar_value(char32_t cp) {
  return cp <= 0x10FFFF && (cp < 0xD800 || cp > 0xDFFF);
}

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::u32string from_utf8(std::string_view text) {
  std::u32string out;
  std::size_t i = 0;
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    unsigned char lead = byte(i);
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (lead < 0x80) {
      len = 1, cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2, cp = lead & 0x1F, min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3, cp = lead & 0x0F, min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4, cp = lead & 0x07, min = 0x10000;
    } else {
      throw std::invalid_argument("invalid UTF-8 lead byte");
    }
    if (i + len > text.size()) {
      throw std::invalid_argument("truncated UTF-8 sequence");
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((byte(i + k) & 0xC0) != 0x80) {
        throw std::invalid_argument("invalid UTF-8 continuation byte");
      }
      cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    if (cp < min || !is_scalar_value(cp)) {
      throw std::invalid_argument("overlong or non-scalar UTF-8 sequence");
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool valid_utf8(std::string_view text) {
  try {
    from_utf8(text);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

}  // namespace docsync
