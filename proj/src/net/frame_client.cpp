#include "docsync/net/frame_client.hpp"

#include <array>
#include <deque>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace docsync::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Bytes = std::vector<std::uint8_t>;

struct FrameClient::Impl {
  Impl(Carrier c) : carrier(c), socket(io), ws(io) {}

  void start_read() {
    if (reading || failed) return;
    reading = true;
    if (carrier == Carrier::tcp) {
      asio::async_read(socket, asio::buffer(header), [this](beast::error_code ec, std::size_t) {
        if (ec) return fail();
        std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                            (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
        body.resize(len);
        asio::async_read(socket, asio::buffer(body), [this](beast::error_code ec2, std::size_t) {
          if (ec2) return fail();
          inbox.push_back(body);
          reading = false;
        });
      });
    } else {
      ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
        if (ec) return fail();
        auto data = buffer.cdata();
        auto* p = static_cast<const std::uint8_t*>(data.data());
        inbox.emplace_back(p, p + data.size());
        buffer.clear();
        reading = false;
      });
    }
  }

  void fail() {
    reading = false;
    failed = true;
  }

  Carrier carrier;
  asio::io_context io;
  tcp::socket socket;
  websocket::stream<tcp::socket> ws;
  beast::flat_buffer buffer;
  std::array<std::uint8_t, 4> header{};
  Bytes body;
  std::deque<Bytes> inbox;
  bool reading = false;
  bool failed = false;
};

FrameClient::FrameClient(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
FrameClient::FrameClient(FrameClient&&) noexcept = default;
FrameClient& FrameClient::operator=(FrameClient&&) noexcept = default;
FrameClient::~FrameClient() {
  if (impl_) close();
}

FrameClient FrameClient::connect(Carrier carrier, const std::string& host, std::uint16_t port,
                                 std::optional<UserId> user) {
  auto impl = std::make_unique<Impl>(carrier);
  tcp::resolver resolver(impl->io);
  auto endpoints = resolver.resolve(host, std::to_string(port));
  tcp::socket& raw = carrier == Carrier::tcp ? impl->socket : impl->ws.next_layer();
  asio::connect(raw, endpoints);
  raw.set_option(tcp::no_delay(true));
  if (carrier == Carrier::ws) {
    std::string target(kCollabPath);
    if (user) target += "?user=" + std::to_string(*user);
    impl->ws.handshake(host + ":" + std::to_string(port), target);
    impl->ws.binary(true);
  }
  return FrameClient(std::move(impl));
}

void FrameClient::send(const Bytes& frame) {
  if (impl_->carrier == Carrier::tcp) {
    auto n = static_cast<std::uint32_t>(frame.size());
    std::array<std::uint8_t, 4> header = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                          static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    std::array<asio::const_buffer, 2> buffers = {asio::buffer(header), asio::buffer(frame)};
    asio::write(impl_->socket, buffers);
  } else {
    impl_->ws.write(asio::buffer(frame));
  }
}

std::optional<Bytes> FrameClient::receive(std::chrono::milliseconds timeout) {
  auto& s = *impl_;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  s.start_read();
  while (s.inbox.empty() && !s.failed) {
    auto left = deadline - std::chrono::steady_clock::now();
    if (left <= std::chrono::steady_clock::duration::zero()) break;
    s.io.restart();
    s.io.run_one_for(left);
  }
  if (s.inbox.empty()) return std::nullopt;
  Bytes next = std::move(s.inbox.front());
  s.inbox.pop_front();
  return next;
}

void FrameClient::close() {
  beast::error_code ec;
  tcp::socket& raw = impl_->carrier == Carrier::tcp ? impl_->socket : impl_->ws.next_layer();
  raw.shutdown(tcp::socket::shutdown_both, ec);
  raw.close(ec);
  // Let a pending read observe the close before the io_context goes away.
  impl_->io.restart();
  impl_->io.poll();
}

}  // namespace docsync::net
