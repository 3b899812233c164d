#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace radarnet {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct ResultRow {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  int step = 0;
  double utility = 0.0;
};

inline constexpr const char* kResultHeader = "scenario,policy,seed,step,utility";

void write_results(std::ostream& out, const std::vector<ResultRow>& rows);
// Throws std::runtime_error on a malformed header or row.
std::vector<ResultRow> read_results(std::istream& in);

// Generic numeric table with a header line.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_table(std::ostream& out, const Table& table);
Table read_table(std::istream& in);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace radarnet
