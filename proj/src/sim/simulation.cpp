#include "docsync/sim/simulation.hpp"

#include <stdexcept>

namespace docsync::sim {

class World::Link final : public Transport {
 public:
  Link(World& world, relay::ConnId conn) : world_(world), conn_(conn) {}

  void send(std::vector<std::uint8_t> bytes) override {
    ++world_.totals_.client_sent;
    world_.loop_.schedule_in(world_.config_.latency_ms,
                             [&w = world_, conn = conn_, b = std::move(bytes)]() mutable {
                               w.deliver_to_server(conn, std::move(b));
                             });
  }

 private:
  World& world_;
  relay::ConnId conn_;
};

World::World(WorldConfig config)
    : config_(std::move(config)),
      relay_(relay::RelayConfig{config_.doclets.empty() ? std::nullopt
                                                        : std::optional(config_.doclets.front().str()),
                                kDefaultAwarenessTtlMs}) {
  if (config_.doclets.empty() || config_.users == 0 || config_.tick_ms == 0) {
    throw std::invalid_argument("world needs doclets, users and a positive tick");
  }
  for (std::size_t u = 0; u < config_.users; ++u) {
    UserId user = u + 1;
    for (std::size_t i = 0; i < config_.doclets.size(); ++i) {
      replica_doclet_.emplace(replica_for(user, i), config_.doclets[i]);
    }
    TransportFactory factory = [this, u, user](std::size_t slot) {
      relay::ConnId conn = relay_.handle_connect(user);
      endpoints_.emplace(conn, Endpoint{u, slot});
      return std::make_unique<Link>(*this, conn);
    };
    SessionConfig sc;
    sc.keepalive_ms = config_.keepalive_ms;
    sc.naive_resend_cap_per_view = config_.naive_resend_cap_per_view;
    sc.clock = [this] { return loop_.now(); };
    sessions_.push_back(std::make_unique<Session>(
        Session::open(config_.strategy, user, config_.doclets, factory, std::move(sc))));
  }
}

void World::schedule_ticks(std::uint64_t from_ms, std::uint64_t until_ms) {
  std::uint64_t first = (from_ms + config_.tick_ms - 1) / config_.tick_ms * config_.tick_ms;
  for (std::uint64_t t = first; t < until_ms; t += config_.tick_ms) {
    for (auto& s : sessions_) {
      loop_.schedule_at(t, [session = s.get(), t] { session->tick(t); });
    }
  }
}

void World::deliver_to_server(relay::ConnId conn, std::vector<std::uint8_t> bytes) {
  ++totals_.server_received;
  auto outbound = relay_.handle_frame(conn, bytes, loop_.now());
  for (auto& out : outbound) {
    ++totals_.server_sent;
    loop_.schedule_in(config_.latency_ms, [this, c = out.conn, b = std::move(out.bytes)]() mutable {
      deliver_to_client(c, std::move(b));
    });
  }
}

void World::deliver_to_client(relay::ConnId conn, std::shared_ptr<const std::vector<std::uint8_t>> bytes) {
  auto it = endpoints_.find(conn);
  if (it == endpoints_.end()) {
    return;
  }
  ++totals_.client_received;
  sessions_[it->second.session]->on_frame(it->second.slot, *bytes);
}

std::size_t World::edit(std::size_t session, const DocletId& doclet, const LocalEdit& edit) {
  Session& s = *sessions_.at(session);
  std::size_t sent = s.on_local_edit(doclet, edit);
  const TextDoc& doc = s.record(doclet).doclet.doc();
  OpId last{doc.replica(), doc.version().get(doc.replica())};
  produced_[doclet].push_back(*doc.find_op(last));
  return sent;
}

const std::vector<Op>& World::produced(const DocletId& doclet) const {
  static const std::vector<Op> kNone;
  auto it = produced_.find(doclet);
  return it == produced_.end() ? kNone : it->second;
}

std::uint64_t World::contamination() const {
  std::uint64_t count = 0;
  auto check = [&](const DocletId& owner, const TextDoc& doc) {
    auto foreign = [&](const Op& op) {
      auto it = replica_doclet_.find(op_id(op).replica);
      return it != replica_doclet_.end() && it->second != owner;
    };
    for (const Op& op : doc.all_ops()) {
      count += foreign(op);
    }
    for (const Op& op : doc.pending()) {
      count += foreign(op);
    }
  };
  for (const auto& s : sessions_) {
    for (const auto& rec : s->records()) {
      check(rec.doclet.id(), rec.doclet.doc());
    }
  }
  for (const auto& id : relay_.hub_ids()) {
    const auto* hub = relay_.hub(id);
    check(hub->doclet.id(), hub->doclet.doc());
  }
  return count;
}

}  // namespace docsync::sim
