#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ppgt/graph.hpp"

namespace ppgt {

enum class PairCategory { basic, regular, extension_like, isomorphic_control };

std::string_view to_string(PairCategory category);

/// Two graphs of equal order and size with known distinguishability.
/// The GD-WL expectation refers to RRWP labels with kBankReferenceWalkSteps.
struct GraphPair {
  std::string name;
  Graph g1;
  Graph g2;
  PairCategory category = PairCategory::basic;
  bool expected_1wl = false;
  bool expected_gdwl_rrwp = false;
};

inline constexpr std::size_t kBankReferenceWalkSteps = 3;

/// The curated pair bank:
///   c6-vs-2c3              6-cycle vs two disjoint triangles
///   decalin-like           two 4-cycles sharing an edge vs two triangles
///                          joined by a bridge (bicyclic, 1-WL-equivalent)
///   decalin-bicyclopentyl  decalin vs bicyclopentyl skeletons
///   prism-vs-k33           triangular prism vs K_{3,3}
///   srg-16                 Shrikhande vs 4x4 rook's graph, srg(16,6,2,2)
///   iso-control            6-cycle vs a relabeled 6-cycle
const std::vector<GraphPair>& pair_bank();

/// Throws if no pair has this name.
const GraphPair& find_pair(std::string_view name);

}  // namespace ppgt
