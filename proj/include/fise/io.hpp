#ifndef FISE_IO_HPP
#define FISE_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fise {

/// FNV-1a 64-bit; used to stamp outputs with the hash of the producing config.
std::uint64_t fnv1a64(std::string_view data);

std::string hash_hex(std::uint64_t h);

/// Shortest round-trip decimal form of a double ("%.17g"); deterministic for a
/// given value, so repeated runs emit byte-identical files.
std::string format_double(double v);

struct CsvTable {
  std::string schema;       ///< e.g. "fise.rates.v1"
  std::string config_hash;  ///< 16 hex digits
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes "# fise-csv schema=<schema> config=<hash>" followed by the header
/// row and data rows.
void write_csv(const std::string& path, const CsvTable& table);

/// Parses a file written by write_csv; throws config_error on malformed input.
CsvTable read_csv(const std::string& path);

}  // namespace fise

#endif
