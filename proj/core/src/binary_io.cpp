#include "ppgt/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "ppgt/tensor.hpp"

namespace ppgt {
namespace {

template <std::size_t N>
void put_le(std::ostream& os, std::uint64_t bits) {
  std::array<char, N> buf;
  for (std::size_t i = 0; i < N; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf.data(), N);
}

template <std::size_t N>
std::uint64_t get_le(std::istream& is) {
  std::array<unsigned char, N> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), N)) throw Error("unexpected end of binary data");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < N; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return bits;
}

}  // namespace

void write_u32_le(std::ostream& os, std::uint32_t value) { put_le<4>(os, value); }

std::uint32_t read_u32_le(std::istream& is) { return static_cast<std::uint32_t>(get_le<4>(is)); }

void write_f64_le(std::ostream& os, std::span<const double> values) {
  for (double v : values) put_le<8>(os, std::bit_cast<std::uint64_t>(v));
}

std::vector<double> read_f64_le(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = std::bit_cast<double>(get_le<8>(is));
  return out;
}

}  // namespace ppgt
