#pragma once

// Network front end for RelayServer. Everything (accepts, reads, timers,
// signal handlers) runs on one io_context thread, so the relay core is only
// ever touched from that thread.
//
// Carriers:
//   ws   WebSocket at /collab, one binary message per frame; ?user=<id>
//        optionally names the user up front.
//   tcp  each frame prefixed with its length as 4 bytes, big-endian.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "docsync/relay/relay_server.hpp"

namespace docsync::net {

enum class Carrier { ws, tcp };

std::optional<Carrier> parse_carrier(std::string_view text);

inline constexpr std::string_view kCollabPath = "/collab";

struct HostConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  Carrier carrier = Carrier::ws;
  relay::RelayConfig relay;
  std::optional<std::filesystem::path> snapshot_dir;
  std::uint64_t snapshot_interval_s = 30;
  /// Plain-text counters over HTTP. 0 picks a free port.
  std::optional<std::uint16_t> metrics_port;
  /// SIGINT/SIGTERM stop the host; SIGUSR1 logs the metrics.
  bool handle_signals = false;
  std::size_t max_frame_bytes = 1 << 20;
};

class RelayHost {
 public:
  explicit RelayHost(HostConfig config);
  ~RelayHost();
  RelayHost(const RelayHost&) = delete;
  RelayHost& operator=(const RelayHost&) = delete;

  /// Restores snapshots and binds the listeners. Throws on bind failure.
  void start();
  /// Serves until stop(). Writes a final snapshot on the way out.
  void run();
  /// Safe to call from any thread or a signal handler context.
  void stop();

  std::uint16_t port() const;
  std::optional<std::uint16_t> metrics_port() const;
  std::size_t restored_hubs() const;

  /// Only call from the io thread or while the host is not running.
  const relay::RelayServer& relay() const;

  struct Impl;  // shared with the connection handlers in the .cpp

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace docsync::net
