#include "ppgt/csv.hpp"

#include <cstdio>
#include <fstream>

#include "ppgt/tensor.hpp"

namespace ppgt {
namespace {

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += escape(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out;
  append_row(out, header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw Error("csv: row width does not match header");
    append_row(out, row);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  const std::string text = table.to_string();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("short write to " + path.string());
}

}  // namespace ppgt
