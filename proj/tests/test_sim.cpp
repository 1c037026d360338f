#include <doctest.h>

#include <cmath>
#include <sstream>

#include "docsync/sim/event_loop.hpp"
#include "docsync/sim/report.hpp"
#include "docsync/sim/scenario.hpp"
#include "docsync/sim/simulation.hpp"

using namespace docsync;
using namespace docsync::sim;

namespace {

ScenarioConfig config(Strategy strategy, Phase phase, std::size_t editors) {
  ScenarioConfig cfg;
  cfg.strategy = strategy;
  cfg.phase = phase;
  cfg.editors = editors;
  return cfg;
}

std::size_t count_lines(const std::string& text, std::string_view prefix) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.starts_with(prefix);
  return n;
}

}  // namespace

TEST_CASE("event loop ordering") {
  EventLoop loop;
  std::vector<int> order;
  loop.schedule_at(10, [&] { order.push_back(2); });
  loop.schedule_at(5, [&] { order.push_back(1); });
  loop.schedule_at(10, [&] { order.push_back(3); });
  loop.schedule_at(10, [&] {
    order.push_back(4);
    loop.schedule_in(0, [&] { order.push_back(5); });
  });
  loop.run_until(7);
  CHECK(order == std::vector<int>{1});
  CHECK(loop.now() == 7);
  CHECK_THROWS_AS(loop.schedule_at(6, [] {}), std::logic_error);
  loop.drain();
  CHECK(order == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(loop.now() == 10);
  CHECK(loop.executed() == 5);
  CHECK(loop.pending() == 0);
}

TEST_CASE("average, extrapolation and decrease reproduce the published cells") {
  std::vector<std::uint64_t> t1 = {38, 29, 36, 36, 33};
  CHECK(average_per_second(t1) == doctest::Approx(34.4));
  CHECK(extrapolate(average_per_second(t1)) == doctest::Approx(172));
  std::vector<std::uint64_t> t3 = {38, 50, 42, 41, 39};
  CHECK(average_per_second(t3) == doctest::Approx(42));
  CHECK(extrapolate(42) == doctest::Approx(210));
  CHECK(extrapolate(418.8) == doctest::Approx(2094));
  CHECK(extrapolate(0) == 0);
  std::vector<double> single = {42};
  CHECK(average_per_second(single) == 42);
  CHECK_THROWS_AS(average_per_second(std::span<const double>{}), std::invalid_argument);

  CHECK(percentage_decrease(172, 4) == doctest::Approx(97.67));
  CHECK(percentage_decrease(181, 5) == doctest::Approx(97.23));
  CHECK(percentage_decrease(210, 7) == doctest::Approx(96.66));
  CHECK(percentage_decrease(1638, 35) == doctest::Approx(97.86));
  CHECK(percentage_decrease(2094, 52) == doctest::Approx(97.51));
  CHECK(percentage_decrease(1239, 28) == doctest::Approx(97.74));
  CHECK(percentage_decrease(50, 50) == 0);
  CHECK_THROWS_AS(percentage_decrease(0, 1), std::invalid_argument);
}

TEST_CASE("percentage decrease truncates at two decimals") {
  // Independent oracle in integer arithmetic: floor(10000 * (b - a) / b) / 100.
  for (std::uint64_t before = 1; before <= 400; ++before) {
    for (std::uint64_t after = 0; after <= before; after += 3) {
      std::uint64_t hundredths = 10000 * (before - after) / before;
      REQUIRE(format_number(percentage_decrease(static_cast<double>(before), static_cast<double>(after))) ==
              format_number(static_cast<double>(hundredths) / 100.0));
    }
  }
}

TEST_CASE("format_number") {
  CHECK(format_number(34.4) == "34.4");
  CHECK(format_number(172) == "172");
  CHECK(format_number(97.67) == "97.67");
  CHECK(format_number(0) == "0");
  CHECK(format_number(1.005) == "1");
}

TEST_CASE("tables") {
  ScenarioResult naive{{38, 29, 36, 36, 33}, 34.4, 172, 0, 0, 1, 0, 0};
  ScenarioResult mux{{1, 2, 0, 0, 1}, 0.8, 4, 0, 0, 1, 0, 0};
  auto row = make_row("Idle (non-typing) state - Single editor", naive, mux);
  CHECK(row.percentage_decrease == doctest::Approx(97.67));

  SUBCASE("empty input is just the header") {
    std::string md = emit_tables({}, TableFormat::markdown);
    CHECK(md == "| Per Second Measurement | Non-Optimized Editor | Optimized Editor |\n|---|---|---|\n");
    CHECK(emit_tables({}, TableFormat::csv) == "scenario,measurement,non_optimized,optimized\n");
  }
  SUBCASE("one row renders an eight line body") {
    std::vector<ComparisonRow> rows = {row};
    std::string md = emit_tables(rows, TableFormat::markdown);
    CHECK(count_lines(md, "| ") == 1 + 8);
    CHECK(count_lines(md, "| Reading #") == 5);
    CHECK(md.find("| Average Per Second Measurement | 34.4 | 0.8 |") != std::string::npos);
    CHECK(md.find("| Extrapolated to 5 seconds | 172 | 4 |") != std::string::npos);
    CHECK(md.find("| Percentage Decrease (172 -> 4) | 97.67% |") != std::string::npos);
  }
  SUBCASE("csv roundtrip") {
    ScenarioResult n2{{37, 32, 37, 36, 39}, 36.2, 181, 0, 0, 1, 0, 0};
    ScenarioResult m2{{1, 1, 1, 0, 2}, 1, 5, 0, 0, 1, 0, 0};
    std::vector<ComparisonRow> rows = {row, make_row("label, with \"quotes\"", n2, m2)};
    auto back = parse_csv_tables(emit_tables(rows, TableFormat::csv));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(back[i].label == rows[i].label);
      CHECK(back[i].non_optimized.readings == rows[i].non_optimized.readings);
      CHECK(back[i].optimized.readings == rows[i].optimized.readings);
      CHECK(back[i].non_optimized.average == doctest::Approx(rows[i].non_optimized.average));
      CHECK(back[i].optimized.extrapolated5s == doctest::Approx(rows[i].optimized.extrapolated5s));
      CHECK(back[i].percentage_decrease == doctest::Approx(rows[i].percentage_decrease));
    }
    CHECK_THROWS_AS(parse_csv_tables("h\na,b\n"), std::invalid_argument);
  }
}

TEST_CASE("scenario config validation") {
  ScenarioConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.editors = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.duration_s = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.typing_chars_per_sec = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tick_ms = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_phase("typing") == Phase::typing);
  CHECK_FALSE(parse_phase("busy"));
  CHECK(doclet_ids(2) == std::vector<DocletId>{DocletId("doclet-0"), DocletId("doclet-1")});
}

TEST_CASE("scenario results are deterministic and self-consistent") {
  for (auto strategy : {Strategy::naive, Strategy::per_socket, Strategy::mux}) {
    for (auto phase : {Phase::idle, Phase::typing}) {
      auto cfg = config(strategy, phase, 2);
      cfg.latency_ms = 3;
      auto a = run_scenario(cfg);
      CHECK(a == run_scenario(cfg));
      REQUIRE(a.readings.size() == 5);
      double sum = 0;
      for (auto r : a.readings) sum += static_cast<double>(r);
      CHECK(a.average == doctest::Approx(sum / 5));
      CHECK(a.extrapolated5s == doctest::Approx(a.average * 5));
      CHECK(a.routing_errors == 0);
      if (strategy != Strategy::naive) CHECK(a.contamination == 0);
    }
  }
  // Untagged frames land in whatever view is active: ops leak across doclets.
  auto cfg = config(Strategy::naive, Phase::typing, 2);
  auto base = run_scenario(cfg);
  CHECK(base.contamination > 0);
  cfg.seed = 7;
  CHECK(run_scenario(cfg).readings != base.readings);
}

TEST_CASE("monotone in the number of editors") {
  for (auto strategy : {Strategy::naive, Strategy::mux}) {
    for (auto phase : {Phase::idle, Phase::typing}) {
      double last = 0;
      for (std::size_t e : {1, 2, 4, 8}) {
        double x = run_scenario(config(strategy, phase, e)).extrapolated5s;
        CHECK(x >= last);
        last = x;
      }
    }
  }
}

TEST_CASE("naive traffic exceeds mux traffic with concurrent typists") {
  for (std::size_t e : {2, 4}) {
    auto cfg = config(Strategy::naive, Phase::typing, e);
    cfg.typists = 2;
    double naive = run_scenario(cfg).extrapolated5s;
    cfg.strategy = Strategy::mux;
    double mux = run_scenario(cfg).extrapolated5s;
    CHECK(naive > mux);
  }
}

TEST_CASE("mux typing at one client: one update per keystroke") {
  auto r = run_scenario(config(Strategy::mux, Phase::typing, 1));
  // 6 keystrokes and one keepalive per second.
  CHECK(r.extrapolated5s >= 25);
  CHECK(r.extrapolated5s <= 40);
  CHECK(run_scenario(config(Strategy::mux, Phase::idle, 1)).extrapolated5s == doctest::Approx(5));
}

TEST_CASE("conservation: every frame sent is received once links drain") {
  for (auto strategy : {Strategy::naive, Strategy::per_socket, Strategy::mux}) {
    World world(WorldConfig{strategy, 3, doclet_ids(3), 4, 25, 1000, 4});
    world.schedule_ticks(0, 3000);
    for (std::uint64_t t = 0; t < 3000; t += 90) {
      world.loop().schedule_at(t, [&world, t] {
        std::size_t u = (t / 90) % 3;
        world.edit(u, world.session(u).active_doclet(), InsertChar{0, U'q'});
      });
    }
    world.loop().drain();
    const auto& tot = world.totals();
    CHECK(tot.client_sent == tot.server_received);
    CHECK(tot.server_sent == tot.client_received);
    std::uint64_t sent = 0, received = 0;
    for (std::size_t i = 0; i < world.session_count(); ++i) {
      auto m = world.session(i).snapshot_metrics();
      sent += m.frames_sent;
      received += m.frames_received;
    }
    CHECK(sent == tot.client_sent);
    CHECK(received == tot.client_received);
    CHECK(world.relay().metrics().frames_in == tot.server_received);
    CHECK(world.relay().metrics().frames_out == tot.server_sent);
  }
}

TEST_CASE("connection counts at four editors") {
  for (auto [strategy, expected] :
       {std::pair{Strategy::naive, 1u}, {Strategy::per_socket, 4u}, {Strategy::mux, 1u}}) {
    CHECK(run_scenario(config(strategy, Phase::idle, 4)).connections == expected);
  }
}
