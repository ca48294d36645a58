#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppgt/graph.hpp"

namespace ppgt {

// Edge-list text format:
//
//   n m
//   u v      (m lines, 0-based node ids)
//
// Blank lines and lines starting with '#' are ignored.
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);

/// Node attribute CSV: one row per node, "id,v0,v1,...". Rows may appear in
/// any order but every id in [0, n) must occur exactly once. An optional
/// header row (first field not an integer) is skipped. Returns the row-major
/// n x dim matrix and sets `dim`.
std::vector<double> read_node_attrs_csv(std::istream& in, std::size_t n, std::size_t& dim);

}  // namespace ppgt
