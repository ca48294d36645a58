#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

namespace ppgt {

void write_u32_le(std::ostream& os, std::uint32_t value);
std::uint32_t read_u32_le(std::istream& is);
void write_f64_le(std::ostream& os, std::span<const double> values);
/// Throws Error if fewer than `count` values are available.
std::vector<double> read_f64_le(std::istream& is, std::size_t count);

}  // namespace ppgt
