// relay: serves doclets to collaborating clients.
//
//   relay --listen 0.0.0.0:8080 --carrier ws --snapshot-dir ./snapshots
//
// SIGUSR1 logs the counters; --metrics-port also serves them over HTTP.

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "docsync/net/relay_host.hpp"

using namespace docsync;

namespace {

// "host:port" or "[v6]:port".
bool split_listen(const std::string& text, std::string& host, std::uint16_t& port) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon + 1 == text.size()) return false;
  host = text.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) host = "0.0.0.0";
  try {
    std::size_t used = 0;
    unsigned long value = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1 || value > 65535) return false;
    port = static_cast<std::uint16_t>(value);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay server for multiplexed doclet collaboration"};

  std::string listen = "127.0.0.1:8080";
  std::string carrier = "ws";
  std::string default_doclet;
  std::string snapshot_dir;
  std::uint64_t snapshot_interval_s = 30;
  std::uint64_t ttl_ms = kDefaultAwarenessTtlMs;
  std::string log_level = "info";
  std::optional<std::uint16_t> metrics_port;

  app.add_option("--listen", listen, "Address and port to accept clients on")->capture_default_str();
  app.add_option("--carrier", carrier, "ws: WebSocket at /collab; tcp: 4-byte length-prefixed frames")
      ->check(CLI::IsMember({"ws", "tcp"}))
      ->capture_default_str();
  app.add_option("--default-doclet", default_doclet, "Doclet that receives frames without a doclet id");
  app.add_option("--snapshot-dir", snapshot_dir, "Directory for <doclet-id>.dsn1 snapshots");
  app.add_option("--snapshot-interval-s", snapshot_interval_s, "Seconds between snapshot passes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--awareness-ttl-ms", ttl_ms, "Drop cursors not refreshed for this long")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, critical or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();
  app.add_option("--metrics-port", metrics_port, "Serve plain-text counters over HTTP on this port");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  net::HostConfig cfg;
  if (!split_listen(listen, cfg.address, cfg.port)) {
    std::cerr << "relay: --listen expects host:port, got " << listen << '\n';
    return 2;
  }
  cfg.carrier = *net::parse_carrier(carrier);
  if (!default_doclet.empty()) {
    try {
      cfg.relay.default_doclet = DocletId(default_doclet).str();
    } catch (const std::exception& e) {
      std::cerr << "relay: --default-doclet: " << e.what() << '\n';
      return 2;
    }
  }
  cfg.relay.awareness_ttl_ms = ttl_ms;
  if (!snapshot_dir.empty()) cfg.snapshot_dir = snapshot_dir;
  cfg.snapshot_interval_s = snapshot_interval_s;
  cfg.metrics_port = metrics_port;
  cfg.handle_signals = true;

  try {
    net::RelayHost host(cfg);
    host.start();
    spdlog::info("listening on {}:{} ({})", cfg.address, host.port(), carrier);
    if (auto mp = host.metrics_port()) spdlog::info("metrics on http://{}:{}/metrics", cfg.address, *mp);
    host.run();
  } catch (const std::exception& e) {
    spdlog::critical("{}", e.what());
    return 1;
  }
  return 0;
}
