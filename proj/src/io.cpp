#include "fise/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fise/errors.hpp"

namespace fise {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw config_error("write_csv: cannot open '" + path + "'");
  os << "# fise-csv schema=" << table.schema << " config=" << table.config_hash << "\n";
  for (size_t i = 0; i < table.header.size(); ++i)
    os << table.header[i] << (i + 1 < table.header.size() ? "," : "");
  os << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  if (!os) throw config_error("write_csv: write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("read_csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# fise-csv ", 0) != 0)
    throw config_error("read_csv: missing schema line in '" + path + "'");
  std::stringstream ss(line.substr(11));
  std::string token;
  while (ss >> token) {
    if (token.rfind("schema=", 0) == 0) table.schema = token.substr(7);
    if (token.rfind("config=", 0) == 0) table.config_hash = token.substr(7);
  }
  if (table.schema.empty())
    throw config_error("read_csv: schema tag missing in '" + path + "'");
  if (!std::getline(is, line))
    throw config_error("read_csv: header row missing in '" + path + "'");
  table.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

}  // namespace fise
