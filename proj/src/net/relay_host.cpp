#include "docsync/net/relay_host.hpp"

#include <array>
#include <chrono>
#include <deque>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "docsync/net/snapshot_store.hpp"

namespace docsync::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Bytes = std::vector<std::uint8_t>;
using SharedBytes = std::shared_ptr<const Bytes>;

std::optional<Carrier> parse_carrier(std::string_view text) {
  if (text == "ws") return Carrier::ws;
  if (text == "tcp") return Carrier::tcp;
  return std::nullopt;
}

namespace {

std::optional<UserId> user_from_target(std::string_view target) {
  auto q = target.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view query = target.substr(q + 1);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    if (pair.starts_with("user=")) {
      std::string value(pair.substr(5));
      try {
        std::size_t used = 0;
        auto user = std::stoull(value, &used);
        if (used == value.size()) return user;
      } catch (const std::exception&) {
      }
      return std::nullopt;
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

std::string_view view(beast::string_view v) { return {v.data(), v.size()}; }

std::string_view path_of(std::string_view target) { return target.substr(0, target.find('?')); }

class Peer {
 public:
  virtual ~Peer() = default;
  virtual void deliver(SharedBytes bytes) = 0;
  virtual void close() = 0;
};

}  // namespace

struct RelayHost::Impl : std::enable_shared_from_this<RelayHost::Impl> {
  explicit Impl(HostConfig cfg)
      : config(std::move(cfg)),
        relay(config.relay),
        acceptor(io),
        metrics_acceptor(io),
        snapshot_timer(io),
        expiry_timer(io),
        signals(io),
        started_at(std::chrono::steady_clock::now()) {}

  std::uint64_t now_ms() const {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::steady_clock::now() - started_at)
                                          .count());
  }

  relay::ConnId attach(std::shared_ptr<Peer> peer, std::optional<UserId> user) {
    relay::ConnId id = relay.handle_connect(user);
    peers[id] = std::move(peer);
    spdlog::debug("conn {} open (user {})", id, user ? std::to_string(*user) : "?");
    return id;
  }

  void detach(relay::ConnId id) {
    if (peers.erase(id) == 0) return;
    relay.handle_disconnect(id);
    spdlog::debug("conn {} closed", id);
  }

  void dispatch(relay::ConnId from, std::span<const std::uint8_t> bytes) {
    for (auto& out : relay.handle_frame(from, bytes, now_ms())) {
      auto it = peers.find(out.conn);
      if (it != peers.end()) it->second->deliver(out.bytes);
    }
  }

  void accept_loop();
  void accept_metrics();
  void schedule_snapshot();
  void schedule_expiry();
  void save_snapshots();
  void wait_signal();
  void shutdown();

  HostConfig config;
  asio::io_context io;
  relay::RelayServer relay;
  tcp::acceptor acceptor;
  tcp::acceptor metrics_acceptor;
  asio::steady_timer snapshot_timer;
  asio::steady_timer expiry_timer;
  asio::signal_set signals;
  std::chrono::steady_clock::time_point started_at;
  std::map<relay::ConnId, std::shared_ptr<Peer>> peers;
  std::optional<SnapshotStore> store;
  std::size_t restored = 0;
  bool stopping = false;
};

namespace {

using Impl = RelayHost::Impl;

class TcpPeer : public Peer, public std::enable_shared_from_this<TcpPeer> {
 public:
  TcpPeer(tcp::socket socket, std::shared_ptr<Impl> host) : socket_(std::move(socket)), host_(std::move(host)) {}

  void start() {
    id_ = host_->attach(shared_from_this(), std::nullopt);
    read_header();
  }

  void deliver(SharedBytes bytes) override {
    bool idle = queue_.empty();
    queue_.push_back(std::move(bytes));
    if (idle) write_next();
  }

  void close() override {
    beast::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
  }

 private:
  void read_header() {
    asio::async_read(socket_, asio::buffer(header_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      std::uint32_t len = (std::uint32_t{self->header_[0]} << 24) | (std::uint32_t{self->header_[1]} << 16) |
                          (std::uint32_t{self->header_[2]} << 8) | std::uint32_t{self->header_[3]};
      if (len > self->host_->config.max_frame_bytes) {
        spdlog::warn("conn {}: {} byte frame exceeds limit", self->id_, len);
        return self->fail();
      }
      self->body_.resize(len);
      self->read_body();
    });
  }

  void read_body() {
    asio::async_read(socket_, asio::buffer(body_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      self->host_->dispatch(self->id_, self->body_);
      self->read_header();
    });
  }

  void write_next() {
    const Bytes& body = *queue_.front();
    auto n = static_cast<std::uint32_t>(body.size());
    out_header_ = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                   static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    std::array<asio::const_buffer, 2> buffers = {asio::buffer(out_header_), asio::buffer(body)};
    asio::async_write(socket_, buffers, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  void fail() {
    close();
    host_->detach(id_);
  }

  tcp::socket socket_;
  std::shared_ptr<Impl> host_;
  relay::ConnId id_ = 0;
  std::array<std::uint8_t, 4> header_{};
  std::array<std::uint8_t, 4> out_header_{};
  Bytes body_;
  std::deque<SharedBytes> queue_;
};

class WsPeer : public Peer, public std::enable_shared_from_this<WsPeer> {
 public:
  WsPeer(tcp::socket socket, std::shared_ptr<Impl> host) : ws_(std::move(socket)), host_(std::move(host)) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->on_request();
    });
  }

  void deliver(SharedBytes bytes) override {
    if (!open_) return;
    bool idle = queue_.empty();
    queue_.push_back(std::move(bytes));
    if (idle) write_next();
  }

  void close() override {
    open_ = false;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

 private:
  void on_request() {
    if (!websocket::is_upgrade(request_) || path_of(view(request_.target())) != kCollabPath) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint is " + std::string(kCollabPath) + "\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        self->close();
      });
      return;
    }
    ws_.binary(true);
    ws_.read_message_max(host_->config.max_frame_bytes);
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->open_ = true;
      self->id_ = self->host_->attach(self, user_from_target(view(self->request_.target())));
      self->buffer_.clear();
      self->read_next();
    });
  }

  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      auto data = self->buffer_.cdata();
      self->host_->dispatch(self->id_, {static_cast<const std::uint8_t*>(data.data()), data.size()});
      self->buffer_.clear();
      self->read_next();
    });
  }

  void write_next() {
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  void fail() {
    close();
    host_->detach(id_);
  }

  websocket::stream<tcp::socket> ws_;
  std::shared_ptr<Impl> host_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  relay::ConnId id_ = 0;
  bool open_ = false;
  std::deque<SharedBytes> queue_;
};

class MetricsSession : public std::enable_shared_from_this<MetricsSession> {
 public:
  MetricsSession(tcp::socket socket, std::shared_ptr<Impl> host) : socket_(std::move(socket)), host_(std::move(host)) {}

  void start() {
    http::async_read(socket_, buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->respond();
    });
  }

 private:
  void respond() {
    auto path = path_of(view(request_.target()));
    bool ok = path == "/metrics" || path == "/";
    response_ = {ok ? http::status::ok : http::status::not_found, request_.version()};
    response_.set(http::field::content_type, "text/plain; charset=utf-8");
    response_.body() = ok ? host_->relay.metrics_text() : "not found\n";
    response_.keep_alive(false);
    response_.prepare_payload();
    http::async_write(socket_, response_, [self = shared_from_this()](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->socket_.shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  tcp::socket socket_;
  std::shared_ptr<Impl> host_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  http::response<http::string_body> response_;
};

}  // namespace

void RelayHost::Impl::accept_loop() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!self->stopping) spdlog::warn("accept failed: {}", ec.message());
      if (ec == asio::error::operation_aborted || self->stopping) return;
    } else {
      socket.set_option(tcp::no_delay(true), ec);
      if (self->config.carrier == Carrier::tcp) {
        std::make_shared<TcpPeer>(std::move(socket), self)->start();
      } else {
        std::make_shared<WsPeer>(std::move(socket), self)->start();
      }
    }
    self->accept_loop();
  });
}

void RelayHost::Impl::accept_metrics() {
  metrics_acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec == asio::error::operation_aborted || self->stopping) return;
    if (!ec) std::make_shared<MetricsSession>(std::move(socket), self)->start();
    self->accept_metrics();
  });
}

void RelayHost::Impl::save_snapshots() {
  if (!store) return;
  try {
    if (auto n = store->save_changed(relay)) spdlog::info("wrote {} snapshot(s)", n);
  } catch (const std::exception& e) {
    spdlog::error("snapshot failed: {}", e.what());
  }
}

void RelayHost::Impl::schedule_snapshot() {
  snapshot_timer.expires_after(std::chrono::seconds(config.snapshot_interval_s));
  snapshot_timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->save_snapshots();
    self->schedule_snapshot();
  });
}

void RelayHost::Impl::schedule_expiry() {
  expiry_timer.expires_after(std::chrono::seconds(1));
  expiry_timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->relay.expire_awareness(self->now_ms());
    self->schedule_expiry();
  });
}

void RelayHost::Impl::wait_signal() {
  signals.async_wait([self = shared_from_this()](beast::error_code ec, int signo) {
    if (ec) return;
    if (signo == SIGUSR1) {
      spdlog::info("metrics\n{}", self->relay.metrics_text());
      self->wait_signal();
    } else {
      spdlog::info("signal {}, shutting down", signo);
      self->shutdown();
    }
  });
}

void RelayHost::Impl::shutdown() {
  if (stopping) return;
  stopping = true;
  beast::error_code ec;
  acceptor.close(ec);
  metrics_acceptor.close(ec);
  snapshot_timer.cancel();
  expiry_timer.cancel();
  signals.cancel(ec);
  auto open = std::move(peers);
  for (auto& [id, peer] : open) {
    peer->close();
    relay.handle_disconnect(id);
  }
  save_snapshots();
}

RelayHost::RelayHost(HostConfig config) : impl_(std::make_shared<Impl>(std::move(config))) {}

RelayHost::~RelayHost() {
  // Drain outstanding handlers; they hold references back to impl_.
  try {
    impl_->shutdown();
    impl_->io.restart();
    impl_->io.run();
  } catch (const std::exception& e) {
    spdlog::error("relay shutdown: {}", e.what());
  }
}

void RelayHost::start() {
  auto& s = *impl_;
  if (s.config.snapshot_dir) {
    if (s.config.snapshot_interval_s == 0) {
      throw std::invalid_argument("snapshot interval must be positive");
    }
    s.store.emplace(*s.config.snapshot_dir);
    std::vector<std::string> errors;
    s.restored = s.store->load_into(s.relay, &errors);
    for (const auto& e : errors) spdlog::warn("skipped snapshot {}", e);
    spdlog::info("restored {} doclet(s) from {}", s.restored, s.config.snapshot_dir->string());
  }

  auto bind = [&](tcp::acceptor& acceptor, std::uint16_t port) {
    tcp::endpoint endpoint(asio::ip::make_address(s.config.address), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  };
  bind(s.acceptor, s.config.port);
  s.accept_loop();
  if (s.config.metrics_port) {
    bind(s.metrics_acceptor, *s.config.metrics_port);
    s.accept_metrics();
  }
  if (s.store) s.schedule_snapshot();
  s.schedule_expiry();

  if (s.config.handle_signals) {
    s.signals.add(SIGINT);
    s.signals.add(SIGTERM);
    s.signals.add(SIGUSR1);
    s.wait_signal();
  }
}

void RelayHost::run() {
  impl_->io.run();
  // Covers stop() racing ahead of run().
  impl_->shutdown();
}

void RelayHost::stop() {
  asio::post(impl_->io, [self = impl_] { self->shutdown(); });
}

std::uint16_t RelayHost::port() const { return impl_->acceptor.local_endpoint().port(); }

std::optional<std::uint16_t> RelayHost::metrics_port() const {
  if (!impl_->config.metrics_port) return std::nullopt;
  return impl_->metrics_acceptor.local_endpoint().port();
}

std::size_t RelayHost::restored_hubs() const { return impl_->restored; }

const relay::RelayServer& RelayHost::relay() const { return impl_->relay; }

}  // namespace docsync::net
