#pragma once

// Scripted benchmark scenarios: idle or typing users under one strategy,
// measured at client 0 in one-second virtual windows after a warm-up.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docsync/session/session.hpp"

namespace docsync::sim {

enum class Phase { idle, typing };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);

struct ScenarioConfig {
  Strategy strategy = Strategy::mux;
  std::size_t editors = 1;
  std::size_t users = 2;
  /// Users 0..typists-1 type during the typing phase.
  std::size_t typists = 1;
  Phase phase = Phase::idle;
  double typing_chars_per_sec = 6.0;
  std::uint64_t tick_ms = 25;
  std::uint64_t keepalive_ms = 1000;
  std::uint64_t duration_s = 5;
  std::size_t readings = 5;
  std::uint64_t warmup_ms = 1000;
  std::uint64_t latency_ms = 0;
  std::uint64_t naive_resend_cap_per_view = 4;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

struct ScenarioResult {
  std::vector<std::uint64_t> readings;
  double average = 0;
  double extrapolated5s = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t connections = 0;
  std::uint64_t routing_errors = 0;
  std::uint64_t contamination = 0;

  bool operator==(const ScenarioResult&) const = default;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// "doclet-0", "doclet-1", ...
std::vector<DocletId> doclet_ids(std::size_t count);

}  // namespace docsync::sim
