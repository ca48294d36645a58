#include "ppgt/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "ppgt/tensor.hpp"

namespace ppgt {

Graph Graph::build(std::size_t n, const EdgeList& edges) {
  Graph g;
  g.n_ = n;
  g.edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    const std::string name = "(" + std::to_string(u) + "," + std::to_string(v) + ")";
    if (u >= n || v >= n) {
      throw Error("edge " + name + " out of range for n=" + std::to_string(n));
    }
    if (u == v) throw Error("self-loop " + name);
    g.edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.degrees_.assign(n, 0);
  for (auto [u, v] : g.edges_) {
    ++g.degrees_[u];
    ++g.degrees_[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + g.degrees_[i];
  g.columns_.assign(g.offsets_[n], 0);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : g.edges_) {
    g.columns_[fill[u]++] = v;
    g.columns_[fill[v]++] = u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.columns_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.columns_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
  }
  return g;
}

Graph build_graph(std::size_t n, const EdgeList& edges) { return Graph::build(n, edges); }

std::span<const std::size_t> Graph::neighbors(std::size_t v) const {
  return {columns_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  if (u >= n_ || v >= n_) return false;
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t Graph::edge_index(std::size_t u, std::size_t v) const {
  const std::pair<std::size_t, std::size_t> key{std::min(u, v), std::max(u, v)};
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return edges_.size();
  return static_cast<std::size_t>(it - edges_.begin());
}

Graph Graph::with_node_attrs(std::size_t dim, std::vector<double> attrs) const {
  if (attrs.size() != n_ * dim) {
    throw ShapeError("node attributes: expected " + std::to_string(n_ * dim) + " values, got " +
                     std::to_string(attrs.size()));
  }
  Graph g = *this;
  g.node_attr_dim_ = dim;
  g.node_attrs_ = std::move(attrs);
  return g;
}

Graph Graph::with_edge_attrs(std::size_t dim, std::vector<double> attrs) const {
  if (attrs.size() != edges_.size() * dim) {
    throw ShapeError("edge attributes: expected " + std::to_string(edges_.size() * dim) +
                     " values, got " + std::to_string(attrs.size()));
  }
  Graph g = *this;
  g.edge_attr_dim_ = dim;
  g.edge_attrs_ = std::move(attrs);
  return g;
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size(), perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] >= perm.size() || inv[perm[i]] != perm.size()) {
      throw Error("permutation is not a bijection on [0, " + std::to_string(perm.size()) + ")");
    }
    inv[perm[i]] = i;
  }
  return inv;
}

Graph permute_graph(const Graph& g, std::span<const std::size_t> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) {
    throw Error("permutation of size " + std::to_string(perm.size()) + " for graph with " +
                std::to_string(n) + " nodes");
  }
  const auto inv = inverse_permutation(perm);
  EdgeList edges;
  edges.reserve(g.num_edges());
  for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
  Graph out = Graph::build(n, edges);

  if (g.node_attr_dim() > 0) {
    const std::size_t f = g.node_attr_dim();
    std::vector<double> attrs(n * f);
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(g.node_attrs().begin() + static_cast<std::ptrdiff_t>(inv[i] * f), f,
                  attrs.begin() + static_cast<std::ptrdiff_t>(i * f));
    out = out.with_node_attrs(f, std::move(attrs));
  }
  if (g.edge_attr_dim() > 0) {
    const std::size_t f = g.edge_attr_dim();
    std::vector<double> attrs(out.num_edges() * f);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const auto [u, v] = g.edges()[e];
      const std::size_t target = out.edge_index(perm[u], perm[v]);
      std::copy_n(g.edge_attrs().begin() + static_cast<std::ptrdiff_t>(e * f), f,
                  attrs.begin() + static_cast<std::ptrdiff_t>(target * f));
    }
    out = out.with_edge_attrs(f, std::move(attrs));
  }
  return out;
}

Subgraph bfs_subgraph(const Graph& g, std::size_t root, std::size_t max_nodes) {
  if (root >= g.num_nodes()) throw Error("bfs_subgraph: root " + std::to_string(root) + " out of range");
  if (max_nodes == 0) throw Error("bfs_subgraph: max_nodes must be >= 1");

  Subgraph sub;
  sub.old_to_new.assign(g.num_nodes(), Subgraph::npos);
  std::deque<std::size_t> queue{root};
  sub.old_to_new[root] = 0;
  sub.new_to_old.push_back(root);
  while (!queue.empty() && sub.new_to_old.size() < max_nodes) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : g.neighbors(v)) {
      if (sub.old_to_new[u] != Subgraph::npos) continue;
      sub.old_to_new[u] = sub.new_to_old.size();
      sub.new_to_old.push_back(u);
      queue.push_back(u);
      if (sub.new_to_old.size() == max_nodes) break;
    }
  }

  EdgeList edges;
  std::vector<std::size_t> kept_edges;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [u, v] = g.edges()[e];
    if (sub.old_to_new[u] != Subgraph::npos && sub.old_to_new[v] != Subgraph::npos) {
      edges.emplace_back(sub.old_to_new[u], sub.old_to_new[v]);
      kept_edges.push_back(e);
    }
  }
  const std::size_t k = sub.new_to_old.size();
  sub.graph = Graph::build(k, edges);

  if (g.node_attr_dim() > 0) {
    const std::size_t f = g.node_attr_dim();
    std::vector<double> attrs(k * f);
    for (std::size_t i = 0; i < k; ++i)
      std::copy_n(g.node_attrs().begin() + static_cast<std::ptrdiff_t>(sub.new_to_old[i] * f), f,
                  attrs.begin() + static_cast<std::ptrdiff_t>(i * f));
    sub.graph = sub.graph.with_node_attrs(f, std::move(attrs));
  }
  if (g.edge_attr_dim() > 0) {
    const std::size_t f = g.edge_attr_dim();
    std::vector<double> attrs(sub.graph.num_edges() * f);
    for (std::size_t e : kept_edges) {
      const auto [u, v] = g.edges()[e];
      const std::size_t target = sub.graph.edge_index(sub.old_to_new[u], sub.old_to_new[v]);
      std::copy_n(g.edge_attrs().begin() + static_cast<std::ptrdiff_t>(e * f), f,
                  attrs.begin() + static_cast<std::ptrdiff_t>(target * f));
    }
    sub.graph = sub.graph.with_edge_attrs(f, std::move(attrs));
  }
  return sub;
}

}  // namespace ppgt
