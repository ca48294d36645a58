#pragma once

#include <filesystem>
#include <string>

#include "ppgt/positional_encoding.hpp"

namespace ppgt {

/// Binary layout: u32 n, u32 k (little-endian), then n*n*k little-endian f64
/// values in [i][j][c] order.
void write_relpos(std::ostream& os, const RelPosTensor& p);
RelPosTensor read_relpos(std::istream& is, RelPosKind kind);

/// Writes `path` (binary) and `path` + ".json" with the kind and the given
/// provenance object (a JSON text, e.g. graph source and K/S settings).
void save_relpos(const std::filesystem::path& path, const RelPosTensor& p,
                 const std::string& provenance_json = "{}");
RelPosTensor load_relpos(const std::filesystem::path& path);

}  // namespace ppgt
