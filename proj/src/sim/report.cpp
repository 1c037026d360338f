#include "docsync/sim/report.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace docsync::sim {

double average_per_second(std::span<const double> readings) {
  if (readings.empty()) {
    throw std::invalid_argument("average of an empty reading list");
  }
  return std::accumulate(readings.begin(), readings.end(), 0.0) / static_cast<double>(readings.size());
}

double average_per_second(std::span<const std::uint64_t> readings) {
  std::vector<double> values(readings.begin(), readings.end());
  return average_per_second(std::span<const double>(values));
}

double extrapolate(double mean, double seconds) { return mean * seconds; }

double percentage_decrease(double before, double after) {
  if (before == 0) {
    throw std::invalid_argument("percentage decrease from zero");
  }
  double hundredths = (before - after) / before * 10000.0;
  // Guard against 9766.999999... style representation error before truncating.
  hundredths += hundredths >= 0 ? 1e-6 : -1e-6;
  return std::trunc(hundredths) / 100.0;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

ComparisonRow make_row(std::string label, ScenarioResult non_optimized, ScenarioResult optimized) {
  ComparisonRow row{std::move(label), std::move(non_optimized), std::move(optimized), 0};
  row.percentage_decrease =
      percentage_decrease(row.non_optimized.extrapolated5s, row.optimized.extrapolated5s);
  return row;
}

namespace {

constexpr const char* kMeasurement = "Per Second Measurement";
constexpr const char* kNonOptimized = "Non-Optimized Editor";
constexpr const char* kOptimized = "Optimized Editor";
constexpr const char* kAverage = "Average Per Second Measurement";
constexpr const char* kExtrapolated = "Extrapolated to 5 seconds";
constexpr std::string_view kReading = "Reading #";
constexpr std::string_view kDecrease = "Percentage Decrease";

std::string decrease_label(const ComparisonRow& row) {
  return std::string(kDecrease) + " (" + format_number(row.non_optimized.extrapolated5s) + " -> " +
         format_number(row.optimized.extrapolated5s) + ")";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

std::string emit_tables(std::span<const ComparisonRow> rows, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "scenario,measurement,non_optimized,optimized\n";
    for (const auto& row : rows) {
      const std::string label = csv_field(row.label);
      for (std::size_t i = 0; i < row.non_optimized.readings.size(); ++i) {
        std::uint64_t opt = i < row.optimized.readings.size() ? row.optimized.readings[i] : 0;
        out << label << ',' << kReading << i + 1 << ',' << row.non_optimized.readings[i] << ',' << opt << '\n';
      }
      out << label << ',' << kAverage << ',' << format_number(row.non_optimized.average) << ','
          << format_number(row.optimized.average) << '\n';
      out << label << ',' << kExtrapolated << ',' << format_number(row.non_optimized.extrapolated5s) << ','
          << format_number(row.optimized.extrapolated5s) << '\n';
      out << label << ',' << decrease_label(row) << ',' << format_number(row.percentage_decrease) << "%,\n";
    }
    return out.str();
  }

  auto header = [&] {
    out << "| " << kMeasurement << " | " << kNonOptimized << " | " << kOptimized << " |\n";
    out << "|---|---|---|\n";
  };
  if (rows.empty()) {
    header();
    return out.str();
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r > 0) out << '\n';
    out << "### " << row.label << "\n\n";
    header();
    for (std::size_t i = 0; i < row.non_optimized.readings.size(); ++i) {
      std::uint64_t opt = i < row.optimized.readings.size() ? row.optimized.readings[i] : 0;
      out << "| " << kReading << i + 1 << " | " << row.non_optimized.readings[i] << " | " << opt << " |\n";
    }
    out << "| " << kAverage << " | " << format_number(row.non_optimized.average) << " | "
        << format_number(row.optimized.average) << " |\n";
    out << "| " << kExtrapolated << " | " << format_number(row.non_optimized.extrapolated5s) << " | "
        << format_number(row.optimized.extrapolated5s) << " |\n";
    out << "| " << decrease_label(row) << " | " << format_number(row.percentage_decrease) << "% |  |\n";
  }
  return out.str();
}

std::vector<ComparisonRow> parse_csv_tables(std::string_view text) {
  std::vector<ComparisonRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 4) {
      throw std::invalid_argument("malformed results line: " + line);
    }
    if (rows.empty() || rows.back().label != f[0]) {
      rows.push_back(ComparisonRow{f[0], {}, {}, 0});
    }
    auto& row = rows.back();
    const std::string& what = f[1];
    if (what.starts_with(kReading)) {
      row.non_optimized.readings.push_back(std::stoull(f[2]));
      row.optimized.readings.push_back(std::stoull(f[3]));
    } else if (what == kAverage) {
      row.non_optimized.average = std::stod(f[2]);
      row.optimized.average = std::stod(f[3]);
    } else if (what == kExtrapolated) {
      row.non_optimized.extrapolated5s = std::stod(f[2]);
      row.optimized.extrapolated5s = std::stod(f[3]);
    } else if (what.starts_with(kDecrease)) {
      row.percentage_decrease = std::stod(f[2]);
    } else {
      throw std::invalid_argument("unknown measurement: " + what);
    }
  }
  return rows;
}

}  // namespace docsync::sim
