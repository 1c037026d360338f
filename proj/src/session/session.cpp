#include "docsync/session/session.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace docsync {

using wire::Frame;
using wire::FrameKind;

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::naive: return "naive";
    case Strategy::per_socket: return "per-socket";
    case Strategy::mux: return "mux";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  if (text == "naive") return Strategy::naive;
  if (text == "per-socket") return Strategy::per_socket;
  if (text == "mux") return Strategy::mux;
  return std::nullopt;
}

ReplicaId replica_for(UserId user, std::size_t doclet_index) {
  return (user << 16) | ((doclet_index + 1) & 0xFFFF);
}

Session::Session(Strategy strategy, UserId user, SessionConfig config)
    : strategy_(strategy), user_(user), config_(std::move(config)) {
  if (!config_.clock) {
    auto start = std::chrono::steady_clock::now();
    config_.clock = [start] {
      return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                            std::chrono::steady_clock::now() - start)
                                            .count());
    };
  }
  if (config_.keepalive_ms == 0) {
    throw std::invalid_argument("keepalive_ms must be positive");
  }
}

Session Session::open(Strategy strategy, UserId user, std::vector<DocletId> doclets,
                      const TransportFactory& factory, SessionConfig config) {
  if (doclets.empty()) {
    throw std::invalid_argument("session needs at least one doclet");
  }
  if (doclets.size() > 0xFFFF) {
    throw std::invalid_argument("too many doclets for one session");
  }
  Session s(strategy, user, std::move(config));
  for (std::size_t i = 0; i < doclets.size(); ++i) {
    auto [_, inserted] = s.by_id_.emplace(doclets[i], i);
    if (!inserted) {
      throw std::invalid_argument("duplicate doclet id: " + doclets[i].str());
    }
    std::size_t transport = strategy == Strategy::per_socket ? i : 0;
    s.records_.push_back(TrackingRecord{Doclet(doclets[i], replica_for(user, i)), {}, {}, transport});
  }

  std::size_t wanted = strategy == Strategy::per_socket ? doclets.size() : 1;
  for (std::size_t i = 0; i < wanted; ++i) {
    s.transports_.push_back(factory(i));
    ++s.metrics_.connections_opened;
  }

  for (const auto& rec : s.records_) {
    std::string tag = s.tag_for(rec);
    s.send(rec.transport, Frame::subscribe(tag));
    s.send(rec.transport, Frame::sync_req(tag, rec.doclet.doc().version()));
  }
  s.keepalive_slot_ = s.now() / s.config_.keepalive_ms;
  return s;
}

std::size_t Session::index_of(const DocletId& doclet) const {
  auto it = by_id_.find(doclet);
  if (it == by_id_.end()) {
    throw std::invalid_argument("doclet not subscribed: " + doclet.str());
  }
  return it->second;
}

std::string Session::tag_for(const TrackingRecord& record) const {
  return strategy_ == Strategy::naive ? std::string{} : record.doclet.id().str();
}

std::uint64_t Session::now() const { return config_.clock(); }

void Session::count_frame(std::size_t bytes, bool outbound) {
  if (outbound) {
    ++metrics_.frames_sent;
    metrics_.bytes_sent += bytes;
  } else {
    ++metrics_.frames_received;
    metrics_.bytes_received += bytes;
  }
  ++metrics_.per_second[now() / 1000];
}

void Session::send(std::size_t transport, const Frame& frame) {
  auto bytes = wire::encode_frame(frame);
  count_frame(bytes.size(), true);
  transports_.at(transport)->send(std::move(bytes));
}

std::size_t Session::on_local_edit(const DocletId& doclet, const LocalEdit& edit) {
  std::size_t idx = index_of(doclet);
  if (idx != active_) {
    throw std::invalid_argument("edits are only accepted in the active doclet");
  }
  TrackingRecord& rec = records_[idx];
  TextDoc& doc = rec.doclet.doc();
  Op op;
  if (const auto* ins = std::get_if<InsertChar>(&edit)) {
    auto inserted = doc.local_insert(ins->index, ins->ch);
    rec.previous_cursor = Anchor::at(inserted.id);
    op = inserted;
  } else {
    std::size_t index = std::get<DeleteChar>(edit).index;
    op = doc.local_delete(index);
    rec.previous_cursor = doc.index_to_anchor(index);
  }
  rec.previous_state = doc.version();
  send(rec.transport, Frame::update(tag_for(rec), {op}));
  return 1;
}

std::size_t Session::on_local_cursor(const DocletId& doclet, std::size_t index) {
  std::size_t idx = index_of(doclet);
  TrackingRecord& rec = records_[idx];
  Anchor anchor = rec.doclet.doc().index_to_anchor(index);
  bool was_active = idx == active_;
  active_ = idx;
  if (was_active && rec.previous_cursor == anchor) {
    return 0;
  }
  rec.previous_cursor = anchor;
  send(rec.transport, Frame::awareness(tag_for(rec), user_, anchor));
  return 1;
}

void Session::arm_naive_resend() {
  std::uint64_t cap = config_.naive_resend_cap_per_view * records_.size();
  naive_backlog_ = std::min(naive_backlog_ + 1, cap);
}

FrameEffects Session::on_frame(std::size_t transport, std::span<const std::uint8_t> bytes) {
  count_frame(bytes.size(), false);
  FrameEffects fx;
  Frame frame;
  try {
    frame = wire::decode_frame(bytes);
  } catch (const wire::WireError&) {
    ++metrics_.decode_errors;
    return fx;
  }
  fx.decoded = true;
  fx.kind = frame.kind;
  if (frame.kind != FrameKind::update && frame.kind != FrameKind::awareness) {
    return fx;
  }

  std::size_t idx = 0;
  switch (strategy_) {
    case Strategy::naive:
      // No id on the wire: whatever arrives lands in the doclet the user is
      // currently in.
      idx = active_;
      break;
    case Strategy::per_socket: {
      auto it = std::find_if(records_.begin(), records_.end(),
                             [&](const TrackingRecord& r) { return r.transport == transport; });
      if (it == records_.end() || (!frame.doclet.empty() && frame.doclet != it->doclet.id().str())) {
        ++metrics_.routing_errors;
        fx.routing_error = true;
        return fx;
      }
      idx = static_cast<std::size_t>(it - records_.begin());
      break;
    }
    case Strategy::mux: {
      auto it = frame.doclet.empty() ? by_id_.end() : by_id_.find(DocletId(frame.doclet));
      if (it == by_id_.end()) {
        ++metrics_.routing_errors;
        fx.routing_error = true;
        return fx;
      }
      idx = it->second;
      break;
    }
  }

  fx.record = idx;
  TrackingRecord& rec = records_[idx];
  bool mismatch = false;
  if (const auto* upd = std::get_if<wire::Update>(&frame.payload)) {
    for (const Op& op : upd->ops) {
      switch (rec.doclet.doc().integrate(op)) {
        case IntegrationResult::applied: ++fx.ops_applied; break;
        case IntegrationResult::buffered: ++fx.ops_buffered; break;
        case IntegrationResult::duplicate: break;
      }
    }
    mismatch = fx.ops_applied + fx.ops_buffered > 0;
  } else {
    const auto& aw = std::get<wire::Awareness>(frame.payload);
    auto res = rec.doclet.apply_awareness(AwarenessEntry{aw.user, aw.anchor, now()});
    fx.awareness_changed = res.changed;
    mismatch = aw.user != user_;
  }

  // An untagged handler cannot tell which view a change belongs to, so every
  // remote change also disturbs its own cursor tracking and queues a cursor
  // re-broadcast for the next tick.
  if (strategy_ == Strategy::naive && mismatch) {
    arm_naive_resend();
    fx.resend_armed = true;
  }
  rec.previous_state = rec.doclet.doc().version();
  return fx;
}

std::size_t Session::tick(std::uint64_t now_ms) {
  std::size_t sent = 0;
  std::uint64_t slot = now_ms / config_.keepalive_ms;
  if (slot > keepalive_slot_) {
    keepalive_slot_ = slot;
    if (strategy_ == Strategy::per_socket) {
      for (const auto& rec : records_) {
        send(rec.transport, Frame::keepalive(tag_for(rec)));
        ++sent;
      }
    } else {
      const auto& rec = records_[active_];
      send(rec.transport, Frame::keepalive(tag_for(rec)));
      ++sent;
    }
  }
  if (strategy_ == Strategy::naive) {
    const auto& rec = records_[active_];
    for (; naive_backlog_ > 0; --naive_backlog_) {
      send(rec.transport, Frame::awareness({}, user_, rec.previous_cursor));
      ++sent;
    }
  }
  return sent;
}

}  // namespace docsync
