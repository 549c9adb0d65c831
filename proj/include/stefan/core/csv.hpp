#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stefan {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parses a full token as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view token);

/// A numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Reads a header line then comma-separated numeric rows. Empty cells become
/// NaN. Throws std::runtime_error on I/O failure or a malformed number.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace stefan
