#include "radarnet/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace radarnet {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, int line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

void check_plain(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("CSV field may not contain commas, quotes or newlines: " + s);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, ptr);
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << "\n";
  for (const ResultRow& r : rows) {
    check_plain(r.scenario);
    check_plain(r.policy);
    out << r.scenario << ',' << r.policy << ',' << r.seed << ',' << r.step << ','
        << format_double(r.utility) << "\n";
  }
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader) {
    throw std::runtime_error("missing results header");
  }
  std::vector<ResultRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw std::runtime_error("line " + std::to_string(n) + ": expected 5 fields");
    ResultRow r;
    r.scenario = cells[0];
    r.policy = cells[1];
    r.seed = parse_number<std::uint64_t>(cells[2], n);
    r.step = parse_number<int>(cells[3], n);
    r.utility = parse_number<double>(cells[4], n);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_table(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    check_plain(table.header[c]);
    out << (c ? "," : "") << table.header[c];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
}

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing table header");
  t.header = split(line);
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error("line " + std::to_string(n) + ": width mismatch");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number<double>(c, n));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace radarnet
