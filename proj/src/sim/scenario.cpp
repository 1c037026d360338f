#include "docsync/sim/scenario.hpp"

#include <random>
#include <stdexcept>

#include "docsync/sim/report.hpp"
#include "docsync/sim/simulation.hpp"

namespace docsync::sim {

std::string_view to_string(Phase phase) {
  return phase == Phase::idle ? "idle" : "typing";
}

std::optional<Phase> parse_phase(std::string_view text) {
  if (text == "idle") return Phase::idle;
  if (text == "typing") return Phase::typing;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (editors == 0) fail("editors must be positive");
  if (users == 0) fail("users must be positive");
  if (typists > users) fail("typists cannot exceed users");
  if (!(typing_chars_per_sec > 0)) fail("typing rate must be positive");
  if (tick_ms == 0) fail("tick_ms must be positive");
  if (keepalive_ms == 0) fail("keepalive_ms must be positive");
  if (readings == 0) fail("readings must be positive");
  if (duration_s < readings) fail("duration_s must cover every reading");
  if (warmup_ms % 1000 != 0) fail("warmup_ms must be whole seconds");
  if (naive_resend_cap_per_view == 0) fail("naive resend cap must be positive");
}

std::vector<DocletId> doclet_ids(std::size_t count) {
  std::vector<DocletId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ids.emplace_back("doclet-" + std::to_string(i));
  }
  return ids;
}

namespace {

struct Keystroke {
  bool backspace;
  char32_t ch;
};

void schedule_typing(World& world, const ScenarioConfig& cfg, std::size_t user,
                     const DocletId& doclet, std::uint64_t end_ms) {
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + user);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::uniform_int_distribution<int> letter(0, 25);
  std::bernoulli_distribution backspace(0.1);

  const double period = 1000.0 / cfg.typing_chars_per_sec;
  for (std::uint64_t k = 0;; ++k) {
    double at = period * (static_cast<double>(k) + 0.5 + jitter(rng));
    auto at_ms = static_cast<std::uint64_t>(at);
    if (at_ms >= end_ms) {
      break;
    }
    Keystroke key{backspace(rng), static_cast<char32_t>(U'a' + letter(rng))};
    world.loop().schedule_at(at_ms, [&world, user, doclet, key] {
      const TextDoc& doc = world.session(user).record(doclet).doclet.doc();
      const auto& cursor = world.session(user).record(doclet).previous_cursor;
      std::size_t index = cursor && doc.resolvable(*cursor) ? doc.anchor_to_index(*cursor) : doc.length();
      if (key.backspace && index > 0) {
        world.edit(user, doclet, DeleteChar{index - 1});
      } else {
        world.edit(user, doclet, InsertChar{index, key.ch});
      }
    });
  }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto ids = doclet_ids(cfg.editors);

  WorldConfig wc;
  wc.strategy = cfg.strategy;
  wc.users = cfg.users;
  wc.doclets = ids;
  wc.latency_ms = cfg.latency_ms;
  wc.tick_ms = cfg.tick_ms;
  wc.keepalive_ms = cfg.keepalive_ms;
  wc.naive_resend_cap_per_view = cfg.naive_resend_cap_per_view;
  World world(wc);

  const std::uint64_t end_ms = cfg.warmup_ms + cfg.duration_s * 1000;
  world.schedule_ticks(0, end_ms);

  // Every user clicks into its own doclet once; user u works in doclet u mod E.
  for (std::size_t u = 0; u < cfg.users; ++u) {
    world.loop().schedule_at(0, [&world, u, doclet = ids[u % ids.size()]] {
      world.session(u).on_local_cursor(doclet, 0);
    });
  }
  if (cfg.phase == Phase::typing) {
    for (std::size_t u = 0; u < cfg.typists; ++u) {
      schedule_typing(world, cfg, u, ids[u % ids.size()], end_ms);
    }
  }

  world.loop().run_until(end_ms - 1);
  world.loop().drain();

  ScenarioResult result;
  const auto metrics = world.session(0).snapshot_metrics();
  const std::uint64_t first_window = cfg.warmup_ms / 1000;
  for (std::size_t i = 0; i < cfg.readings; ++i) {
    auto it = metrics.per_second.find(first_window + i);
    result.readings.push_back(it == metrics.per_second.end() ? 0 : it->second);
  }
  result.average = average_per_second(std::span<const std::uint64_t>(result.readings));
  result.extrapolated5s = extrapolate(result.average);
  result.frames_sent = metrics.frames_sent;
  result.frames_received = metrics.frames_received;
  result.connections = metrics.connections_opened;
  result.routing_errors = world.relay().metrics().routing_errors;
  for (std::size_t u = 0; u < world.session_count(); ++u) {
    result.routing_errors += world.session(u).snapshot_metrics().routing_errors;
  }
  result.contamination = world.contamination();
  return result;
}

}  // namespace docsync::sim
