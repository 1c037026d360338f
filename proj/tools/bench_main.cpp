// bench: runs simulated message-count scenarios.
//
//   bench --mode mux --editors 2 --phase typing
//   bench compare --editors 1,2,4 --phases idle,typing --format markdown

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "docsync/sim/report.hpp"
#include "docsync/sim/scenario.hpp"

using namespace docsync;
using namespace docsync::sim;

namespace {

std::string scenario_label(Phase phase, std::size_t editors) {
  std::string state = phase == Phase::idle ? "Idle (non-typing) state" : "Active (typing) state";
  std::string count = editors == 1 ? "Single editor" : std::to_string(editors) + " editor instances";
  return state + " - " + count;
}

ScenarioResult timed_run(const ScenarioConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  auto result = run_scenario(cfg);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  std::cerr << "ran " << to_string(cfg.strategy) << ' ' << to_string(cfg.phase) << " E=" << cfg.editors
            << " in " << ms.count() << " ms\n";
  return result;
}

std::string single_report(const ScenarioConfig& cfg, const ScenarioResult& r, TableFormat format) {
  std::ostringstream out;
  std::string column = std::string(to_string(cfg.strategy));
  if (format == TableFormat::csv) {
    out << "measurement," << column << '\n';
    for (std::size_t i = 0; i < r.readings.size(); ++i) {
      out << "Reading #" << i + 1 << ',' << r.readings[i] << '\n';
    }
    out << "Average Per Second Measurement," << format_number(r.average) << '\n';
    out << "Extrapolated to 5 seconds," << format_number(r.extrapolated5s) << '\n';
    out << "Connections," << r.connections << '\n';
    out << "Frames sent," << r.frames_sent << '\n';
    out << "Frames received," << r.frames_received << '\n';
    return out.str();
  }
  out << "### " << scenario_label(cfg.phase, cfg.editors) << " (" << column << ")\n\n";
  out << "| Per Second Measurement | " << column << " |\n|---|---|\n";
  for (std::size_t i = 0; i < r.readings.size(); ++i) {
    out << "| Reading #" << i + 1 << " | " << r.readings[i] << " |\n";
  }
  out << "| Average Per Second Measurement | " << format_number(r.average) << " |\n";
  out << "| Extrapolated to 5 seconds | " << format_number(r.extrapolated5s) << " |\n";
  out << "| Connections | " << r.connections << " |\n";
  out << "| Frames sent | " << r.frames_sent << " |\n";
  out << "| Frames received | " << r.frames_received << " |\n";
  return out.str();
}

std::string connection_report(const ScenarioConfig& base, const std::vector<std::size_t>& editors,
                              TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "editors,naive,per-socket,mux\n";
  } else {
    out << "\n### Connections opened per client\n\n| Editors | naive | per-socket | mux |\n|---|---|---|---|\n";
  }
  for (std::size_t e : editors) {
    std::uint64_t counts[3];
    Strategy strategies[3] = {Strategy::naive, Strategy::per_socket, Strategy::mux};
    for (int i = 0; i < 3; ++i) {
      ScenarioConfig cfg = base;
      cfg.strategy = strategies[i];
      cfg.editors = e;
      cfg.phase = Phase::idle;
      counts[i] = run_scenario(cfg).connections;
    }
    if (format == TableFormat::csv) {
      out << e << ',' << counts[0] << ',' << counts[1] << ',' << counts[2] << '\n';
    } else {
      out << "| " << e << " | " << counts[0] << " | " << counts[1] << " | " << counts[2] << " |\n";
    }
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated message-count benchmark for multiplexed doclet sync"};
  app.require_subcommand(0, 1);

  ScenarioConfig cfg;
  std::string mode = "mux";
  std::string phase = "idle";
  std::string format = "markdown";
  std::string out_path;

  auto add_common = [&](CLI::App* a) {
    a->add_option("--users", cfg.users, "Number of users")->capture_default_str();
    a->add_option("--typists", cfg.typists, "Users typing in the typing phase")->capture_default_str();
    a->add_option("--typing-rate", cfg.typing_chars_per_sec, "Characters per second per typist")
        ->capture_default_str();
    a->add_option("--tick-ms", cfg.tick_ms, "Session tick period")->capture_default_str();
    a->add_option("--keepalive-ms", cfg.keepalive_ms, "Keepalive period")->capture_default_str();
    a->add_option("--duration-s", cfg.duration_s, "Measured seconds after warm-up")->capture_default_str();
    a->add_option("--latency-ms", cfg.latency_ms, "One-way link latency")->capture_default_str();
    a->add_option("--resend-cap", cfg.naive_resend_cap_per_view,
                  "Queued cursor re-broadcasts per view in naive mode")
        ->capture_default_str();
    a->add_option("--seed", cfg.seed, "Workload seed")->capture_default_str();
    a->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"markdown", "csv"}))
        ->capture_default_str();
    a->add_option("--out", out_path, "Write the report here instead of stdout");
  };

  add_common(&app);
  app.add_option("--mode", mode, "Strategy")->check(CLI::IsMember({"naive", "per-socket", "mux"}))
      ->capture_default_str();
  app.add_option("--editors", cfg.editors, "Doclets on the page")->capture_default_str();
  app.add_option("--phase", phase, "Workload")->check(CLI::IsMember({"idle", "typing"}))->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Run the naive vs mux matrix plus a connection report");
  std::vector<std::size_t> editors_list = {1, 2, 4};
  std::vector<std::string> phases = {"idle", "typing"};
  compare->add_option("--editors", editors_list, "Editor counts")->delimiter(',')->capture_default_str();
  compare->add_option("--phases", phases, "Phases")
      ->delimiter(',')
      ->check(CLI::IsMember({"idle", "typing"}))
      ->capture_default_str();
  add_common(compare);

  CLI11_PARSE(app, argc, argv);

  const TableFormat fmt = format == "csv" ? TableFormat::csv : TableFormat::markdown;
  std::string report;
  try {
    if (compare->parsed()) {
      std::vector<ComparisonRow> rows;
      for (const auto& p : phases) {
        for (std::size_t e : editors_list) {
          ScenarioConfig c = cfg;
          c.phase = *parse_phase(p);
          c.editors = e;
          c.strategy = Strategy::naive;
          auto naive = timed_run(c);
          c.strategy = Strategy::mux;
          auto mux = timed_run(c);
          rows.push_back(make_row(scenario_label(c.phase, e), naive, mux));
        }
      }
      report = emit_tables(rows, fmt) + connection_report(cfg, editors_list, fmt);
    } else {
      cfg.strategy = *parse_strategy(mode);
      cfg.phase = *parse_phase(phase);
      report = single_report(cfg, timed_run(cfg), fmt);
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }

  if (out_path.empty()) {
    std::cout << report;
  } else {
    std::ofstream file(out_path);
    if (!file) {
      std::cerr << "bench: cannot write " << out_path << '\n';
      return 1;
    }
    file << report;
  }
  return 0;
}
