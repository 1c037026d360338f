#pragma once

// In-process world: one relay and a set of client sessions connected by
// simulated links on a shared virtual clock.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "docsync/relay/relay_server.hpp"
#include "docsync/session/session.hpp"
#include "docsync/sim/event_loop.hpp"

namespace docsync::sim {

struct WorldConfig {
  Strategy strategy = Strategy::mux;
  std::size_t users = 2;
  std::vector<DocletId> doclets;
  std::uint64_t latency_ms = 0;
  std::uint64_t tick_ms = 25;
  std::uint64_t keepalive_ms = 1000;
  std::uint64_t naive_resend_cap_per_view = 4;
};

struct LinkTotals {
  std::uint64_t client_sent = 0;
  std::uint64_t client_received = 0;
  std::uint64_t server_received = 0;
  std::uint64_t server_sent = 0;
};

class World {
 public:
  /// Opens every session at the current virtual time (user ids 1..users).
  explicit World(WorldConfig config);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  EventLoop& loop() { return loop_; }
  relay::RelayServer& relay() { return relay_; }
  const relay::RelayServer& relay() const { return relay_; }
  Session& session(std::size_t index) { return *sessions_.at(index); }
  const Session& session(std::size_t index) const { return *sessions_.at(index); }
  std::size_t session_count() const { return sessions_.size(); }
  const WorldConfig& config() const { return config_; }

  /// Schedules every session's tick at multiples of tick_ms in [from, until).
  void schedule_ticks(std::uint64_t from_ms, std::uint64_t until_ms);

  /// Local edit that also records the produced op for oracle checks.
  std::size_t edit(std::size_t session, const DocletId& doclet, const LocalEdit& edit);

  /// Ops produced by all sessions for `doclet`, in generation order.
  const std::vector<Op>& produced(const DocletId& doclet) const;

  /// Ops (integrated or buffered) sitting in some replica of doclet d although
  /// they were produced for a different doclet. Zero means isolated doclets.
  std::uint64_t contamination() const;

  const LinkTotals& totals() const { return totals_; }

 private:
  struct Endpoint {
    std::size_t session;
    std::size_t slot;
  };
  class Link;

  void deliver_to_server(relay::ConnId conn, std::vector<std::uint8_t> bytes);
  void deliver_to_client(relay::ConnId conn, std::shared_ptr<const std::vector<std::uint8_t>> bytes);

  WorldConfig config_;
  EventLoop loop_;
  relay::RelayServer relay_;
  std::vector<std::unique_ptr<Session>> sessions_;
  std::map<relay::ConnId, Endpoint> endpoints_;
  std::map<ReplicaId, DocletId> replica_doclet_;
  std::map<DocletId, std::vector<Op>> produced_;
  LinkTotals totals_;
};

}  // namespace docsync::sim
