#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ppgt {

/// Shortest text that round-trips the double ("%.17g").
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

/// Writes with "\n" line endings; fields containing a comma or quote are
/// quoted.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace ppgt
