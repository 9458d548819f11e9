#pragma once

#include <optional>
#include <string>
#include <vector>

#include "leki/diagnostics.hpp"

namespace leki {

// Shortest round-trippable decimal form ("%.17g"); identical bytes for
// identical doubles regardless of locale or stream state.
std::string format_double(double x);

extern const char* const kRowHeader;  // the per-iteration CSV column list

std::string row_to_csv(const MetricsRow& row);

void write_rows_csv(const std::string& path, const std::vector<MetricsRow>& rows);
void write_rows_json(const std::string& path, const std::vector<MetricsRow>& rows);

// Parse a per-iteration CSV produced by write_rows_csv.
std::vector<MetricsRow> read_rows_csv(const std::string& path);

}  // namespace leki
