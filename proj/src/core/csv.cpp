#include "stefan/core/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stefan {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) token.remove_suffix(1);
  if (token.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    // from_chars rejects "inf"/"nan" spellings produced by some writers.
    if (token == "nan" || token == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (token == "inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  }
  return v;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      if (!std::isnan(row[j])) out << format_double(row[j]);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_csv(out, table);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      table.header.push_back(cell);
    }
  }
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell(line.data() + start,
                                  (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(parse_double(cell));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return read_csv(in);
}

}  // namespace stefan
