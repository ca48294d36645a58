#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ppgt {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

/// Immutable undirected simple graph. Edges are stored once as (u, v) with
/// u < v, sorted; adjacency is kept in CSR form with ascending neighbors.
///
/// Optional attributes: an n x node_attr_dim row-major node matrix, and one
/// edge_attr_dim vector per edge in edge-list order.
class Graph {
 public:
  Graph() = default;

  /// Canonicalizes `edges` (orientation, order, duplicates). Throws on
  /// self-loops and out-of-range endpoints, naming the edge.
  static Graph build(std::size_t n, const EdgeList& edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const EdgeList& edges() const { return edges_; }
  std::span<const std::size_t> neighbors(std::size_t v) const;
  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
  const std::vector<std::size_t>& degrees() const { return degrees_; }
  bool has_edge(std::size_t u, std::size_t v) const;
  /// Position of edge {u, v} in edges(), or num_edges() if absent.
  std::size_t edge_index(std::size_t u, std::size_t v) const;

  const std::vector<std::size_t>& row_offsets() const { return offsets_; }
  const std::vector<std::size_t>& column_indices() const { return columns_; }

  std::size_t node_attr_dim() const { return node_attr_dim_; }
  const std::vector<double>& node_attrs() const { return node_attrs_; }
  std::size_t edge_attr_dim() const { return edge_attr_dim_; }
  const std::vector<double>& edge_attrs() const { return edge_attrs_; }

  Graph with_node_attrs(std::size_t dim, std::vector<double> attrs) const;
  Graph with_edge_attrs(std::size_t dim, std::vector<double> attrs) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_ = 0;
  EdgeList edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<std::size_t> degrees_;
  std::size_t node_attr_dim_ = 0;
  std::vector<double> node_attrs_;
  std::size_t edge_attr_dim_ = 0;
  std::vector<double> edge_attrs_;
};

Graph build_graph(std::size_t n, const EdgeList& edges);

/// Relabels node i as perm[i]; attributes follow their nodes and edges.
/// Throws unless perm is a bijection on [0, n).
Graph permute_graph(const Graph& g, std::span<const std::size_t> perm);

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm);

struct Subgraph {
  Graph graph;
  /// old id -> new id; npos for nodes outside the subgraph.
  std::vector<std::size_t> old_to_new;
  std::vector<std::size_t> new_to_old;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Induced subgraph on the first `max_nodes` nodes reached by BFS from
/// `root`, visiting neighbors in ascending id order. The root becomes node 0
/// and new ids follow discovery order.
Subgraph bfs_subgraph(const Graph& g, std::size_t root, std::size_t max_nodes);

}  // namespace ppgt
