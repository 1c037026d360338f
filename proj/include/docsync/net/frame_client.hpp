#pragma once

// Blocking client for either relay carrier. Incoming frames are read in the
// background of receive(); each call waits at most `timeout` for the next one.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docsync/net/relay_host.hpp"
#include "docsync/session/session.hpp"

namespace docsync::net {

class FrameClient {
 public:
  /// Connects and, for ws, completes the /collab handshake. Throws on failure.
  static FrameClient connect(Carrier carrier, const std::string& host, std::uint16_t port,
                             std::optional<UserId> user = std::nullopt);

  FrameClient(FrameClient&&) noexcept;
  FrameClient& operator=(FrameClient&&) noexcept;
  ~FrameClient();

  void send(const std::vector<std::uint8_t>& frame);
  std::optional<std::vector<std::uint8_t>> receive(std::chrono::milliseconds timeout);
  void close();

 private:
  struct Impl;
  explicit FrameClient(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Session transport that writes through a shared FrameClient.
class ClientTransport : public Transport {
 public:
  explicit ClientTransport(std::shared_ptr<FrameClient> client) : client_(std::move(client)) {}
  void send(std::vector<std::uint8_t> bytes) override { client_->send(bytes); }

 private:
  std::shared_ptr<FrameClient> client_;
};

}  // namespace docsync::net
