#pragma once

// Reporting arithmetic and the results-table layout:
//
//   | Per Second Measurement | Non-Optimized Editor | Optimized Editor |
//   | Reading #1..#N         | ...                  | ...              |
//   | Average Per Second Measurement | ...          | ...              |
//   | Extrapolated to 5 seconds      | ...          | ...              |
//   | Percentage Decrease (a -> b)   | p%           |                  |

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docsync/sim/scenario.hpp"

namespace docsync::sim {

/// Arithmetic mean. Throws std::invalid_argument for an empty list.
double average_per_second(std::span<const double> readings);
double average_per_second(std::span<const std::uint64_t> readings);

double extrapolate(double mean, double seconds = 5.0);

/// (before - after) / before * 100, truncated toward zero at two decimals.
/// Throws std::invalid_argument when before is 0.
double percentage_decrease(double before, double after);

/// Shortest rendering with at most two decimals: 34.4, 172, 97.67.
std::string format_number(double value);

struct ComparisonRow {
  std::string label;
  ScenarioResult non_optimized;
  ScenarioResult optimized;
  double percentage_decrease = 0;
};

ComparisonRow make_row(std::string label, ScenarioResult non_optimized, ScenarioResult optimized);

enum class TableFormat { markdown, csv };

std::string emit_tables(std::span<const ComparisonRow> rows, TableFormat format);

/// Parses emit_tables(..., csv) output back into rows. Only the reported
/// fields (readings, average, extrapolation, decrease) are recovered.
std::vector<ComparisonRow> parse_csv_tables(std::string_view text);

}  // namespace docsync::sim
