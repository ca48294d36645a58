#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ppgt/graph.hpp"

namespace ppgt {

/// A generalized distance between two nodes: an integer (shortest path
/// length) or an exact rational tuple (RRWP).
using DistanceLabel = std::variant<std::int64_t, std::vector<mpq_class>>;

inline constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

/// All-pairs labels, row-major n x n.
struct DistanceLabels {
  std::size_t n = 0;
  std::vector<DistanceLabel> labels;

  const DistanceLabel& operator()(std::size_t i, std::size_t j) const { return labels[i * n + j]; }
};

/// BFS distances; unreachable pairs get kUnreachable.
DistanceLabels spd_labels(const Graph& g);
/// (I, W, ..., W^(K-1))_ij as exact rationals.
DistanceLabels rrwp_labels(const Graph& g, std::size_t walk_steps);

std::string label_to_string(const DistanceLabel& label);

/// Colors are canonical within one graph: at every round, a node's color is
/// the rank of its refinement key among the sorted distinct keys. Colors of
/// two graphs are therefore comparable through the recorded key tables,
/// without a shared dictionary.
struct ColorPartition {
  std::vector<std::size_t> colors;
  std::size_t round = 0;
  bool stable = false;
  /// history[0] is the initial coloring, history[t] the coloring after round t.
  std::vector<std::vector<std::size_t>> history;
  /// Per entry of history: the sorted distinct keys with their node counts.
  std::vector<std::string> signatures;
  /// Sorted distinct distance labels (GD-WL only).
  std::string label_table;

  std::size_t num_colors() const;
};

/// Classic color refinement: key = (old color, sorted neighbor colors).
/// Initial colors are uniform, or ranks of node attribute rows when present.
/// `max_rounds` = 0 means n.
ColorPartition wl1_refine(const Graph& g, std::size_t max_rounds = 0);

/// GD-WL refinement: key = (old color, sorted multiset of (label(v, u), old
/// color of u) over all u).
ColorPartition gdwl_refine(const Graph& g, const DistanceLabels& labels, std::size_t max_rounds = 0);

/// Isomorphism-invariant encoding of every round's key table. Two graphs have
/// equal fingerprints iff refinement produced equal color multisets at every
/// round.
std::string graph_fingerprint(const ColorPartition& part);

/// Audit export: rounds, colors per round and the fingerprint.
std::string partition_to_json(const ColorPartition& part);

}  // namespace ppgt
