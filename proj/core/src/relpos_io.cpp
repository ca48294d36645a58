#include "ppgt/relpos_io.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "ppgt/binary_io.hpp"

namespace ppgt {

void write_relpos(std::ostream& os, const RelPosTensor& p) {
  constexpr auto limit = std::numeric_limits<std::uint32_t>::max();
  if (p.n > limit || p.k > limit) throw Error("relpos: dimensions exceed the header range");
  if (p.data.size() != p.n * p.n * p.k) throw ShapeError("relpos: data size does not match n*n*k");
  write_u32_le(os, static_cast<std::uint32_t>(p.n));
  write_u32_le(os, static_cast<std::uint32_t>(p.k));
  write_f64_le(os, p.data);
}

RelPosTensor read_relpos(std::istream& is, RelPosKind kind) {
  RelPosTensor p;
  p.n = read_u32_le(is);
  p.k = read_u32_le(is);
  p.kind = kind;
  p.data = read_f64_le(is, p.n * p.n * p.k);
  if (is.peek() != std::char_traits<char>::eof()) throw Error("relpos: trailing bytes after data");
  return p;
}

void save_relpos(const std::filesystem::path& path, const RelPosTensor& p,
                 const std::string& provenance_json) {
  {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw Error("cannot write " + path.string());
    write_relpos(bin, p);
    if (!bin) throw Error("short write to " + path.string());
  }
  const nlohmann::json sidecar = {{"format", "ppgt-relpos-1"},
                                  {"n", p.n},
                                  {"k", p.k},
                                  {"kind", to_string(p.kind)},
                                  {"provenance", nlohmann::json::parse(provenance_json)}};
  std::ofstream meta(path.string() + ".json");
  if (!meta) throw Error("cannot write " + path.string() + ".json");
  meta << sidecar.dump(2) << '\n';
}

RelPosTensor load_relpos(const std::filesystem::path& path) {
  std::ifstream meta(path.string() + ".json");
  if (!meta) throw Error("cannot read " + path.string() + ".json");
  const auto sidecar = nlohmann::json::parse(meta);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw Error("cannot read " + path.string());
  RelPosTensor p = read_relpos(bin, parse_relpos_kind(sidecar.at("kind").get<std::string>()));
  if (p.n != sidecar.at("n").get<std::size_t>() || p.k != sidecar.at("k").get<std::size_t>()) {
    throw Error("relpos: header disagrees with sidecar for " + path.string());
  }
  return p;
}

}  // namespace ppgt
