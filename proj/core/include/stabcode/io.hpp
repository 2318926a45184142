#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stabcode {

/// A CSV table with `#`-prefixed metadata lines, a header row, and data rows.
/// Numeric cells are written with enough digits to round-trip doubles.
struct CsvTable {
    std::vector<std::string> metadata;  // without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string format_cell(double v);

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Parses our own CSV dialect back; throws on malformed input.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// FNV-1a 64-bit over a canonical string; stable across runs and platforms.
std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

}  // namespace stabcode
