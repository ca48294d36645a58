#include "ppgt/wl.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ppgt/positional_encoding.hpp"

namespace ppgt {
namespace {

using Key = std::vector<std::size_t>;

std::string key_to_string(const Key& key) {
  std::string s = "(";
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(key[i]);
  }
  s += ')';
  return s;
}

/// Ranks keys among their sorted distinct values and records the table.
std::vector<std::size_t> rank_keys(const std::vector<Key>& keys, std::string& signature) {
  std::map<Key, std::size_t> counts;
  for (const auto& k : keys) ++counts[k];
  std::map<Key, std::size_t> rank;
  std::ostringstream os;
  std::size_t r = 0;
  for (const auto& [k, count] : counts) {
    rank[k] = r++;
    os << key_to_string(k) << '*' << count << ';';
  }
  signature = os.str();
  std::vector<std::size_t> colors(keys.size());
  for (std::size_t v = 0; v < keys.size(); ++v) colors[v] = rank.at(keys[v]);
  return colors;
}

void initial_colors(const Graph& g, ColorPartition& part) {
  const std::size_t n = g.num_nodes();
  const std::size_t f = g.node_attr_dim();
  std::vector<std::vector<double>> rows(n);
  for (std::size_t v = 0; v < n; ++v) {
    rows[v].assign(g.node_attrs().begin() + static_cast<std::ptrdiff_t>(v * f),
                   g.node_attrs().begin() + static_cast<std::ptrdiff_t>((v + 1) * f));
  }
  std::map<std::vector<double>, std::size_t> counts;
  for (const auto& r : rows) ++counts[r];
  std::map<std::vector<double>, std::size_t> rank;
  std::ostringstream os;
  os.precision(17);
  std::size_t next = 0;
  for (const auto& [row, count] : counts) {
    rank[row] = next++;
    os << '[';
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "]*" << count << ';';
  }
  part.colors.resize(n);
  for (std::size_t v = 0; v < n; ++v) part.colors[v] = rank.at(rows[v]);
  part.history.push_back(part.colors);
  part.signatures.push_back(os.str());
}

template <class MakeKey>
ColorPartition refine(const Graph& g, std::size_t max_rounds, std::string label_table,
                      MakeKey make_key) {
  const std::size_t n = g.num_nodes();
  if (max_rounds == 0) max_rounds = std::max<std::size_t>(n, 1);
  ColorPartition part;
  part.label_table = std::move(label_table);
  initial_colors(g, part);

  std::vector<Key> keys(n);
  for (std::size_t t = 1; t <= max_rounds; ++t) {
    const std::size_t before = part.num_colors();
    for (std::size_t v = 0; v < n; ++v) keys[v] = make_key(v, part.colors);
    std::string signature;
    part.colors = rank_keys(keys, signature);
    part.history.push_back(part.colors);
    part.signatures.push_back(std::move(signature));
    part.round = t;
    // Keys start with the old color, so the new partition refines the old
    // one; an equal color count means nothing was split.
    if (part.num_colors() == before) {
      part.stable = true;
      break;
    }
  }
  return part;
}

DistanceLabels from_rational(std::size_t n, const std::vector<RationalMatrix>& powers) {
  DistanceLabels out;
  out.n = n;
  out.labels.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<mpq_class> tuple;
      tuple.reserve(powers.size());
      for (const auto& m : powers) tuple.push_back(m(i, j));
      out.labels.emplace_back(std::move(tuple));
    }
  return out;
}

}  // namespace

std::size_t ColorPartition::num_colors() const {
  if (colors.empty()) return 0;
  return *std::max_element(colors.begin(), colors.end()) + 1;
}

DistanceLabels spd_labels(const Graph& g) {
  const std::size_t n = g.num_nodes();
  DistanceLabels out;
  out.n = n;
  out.labels.assign(n * n, DistanceLabel{kUnreachable});
  std::vector<std::int64_t> dist(n);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kUnreachable);
    dist[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t w : g.neighbors(u)) {
        if (dist[w] != kUnreachable) continue;
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
    for (std::size_t t = 0; t < n; ++t) out.labels[s * n + t] = dist[t];
  }
  return out;
}

DistanceLabels rrwp_labels(const Graph& g, std::size_t walk_steps) {
  return from_rational(g.num_nodes(), rrwp_exact(g, walk_steps));
}

std::string label_to_string(const DistanceLabel& label) {
  if (const auto* d = std::get_if<std::int64_t>(&label)) {
    return *d == kUnreachable ? std::string("inf") : std::to_string(*d);
  }
  const auto& tuple = std::get<std::vector<mpq_class>>(label);
  std::string s = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) s += ',';
    s += tuple[i].get_str();
  }
  s += ')';
  return s;
}

ColorPartition wl1_refine(const Graph& g, std::size_t max_rounds) {
  return refine(g, max_rounds, "", [&](std::size_t v, const std::vector<std::size_t>& colors) {
    Key key;
    key.reserve(1 + g.degree(v));
    for (std::size_t u : g.neighbors(v)) key.push_back(colors[u]);
    std::sort(key.begin(), key.end());
    key.insert(key.begin(), colors[v]);
    return key;
  });
}

ColorPartition gdwl_refine(const Graph& g, const DistanceLabels& labels, std::size_t max_rounds) {
  const std::size_t n = g.num_nodes();
  if (labels.n != n || labels.labels.size() != n * n) {
    throw Error("gdwl_refine: labels cover " + std::to_string(labels.n) + " nodes, graph has " +
                std::to_string(n));
  }
  // Labels are replaced by their rank among the distinct label values of this
  // graph; the value table is part of the fingerprint.
  std::vector<DistanceLabel> distinct = labels.labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> label_rank(n * n);
  for (std::size_t ij = 0; ij < n * n; ++ij) {
    label_rank[ij] = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), labels.labels[ij]) - distinct.begin());
  }
  std::string table;
  for (const auto& l : distinct) table += label_to_string(l) + ';';

  return refine(g, max_rounds, std::move(table),
                [&, n](std::size_t v, const std::vector<std::size_t>& colors) {
                  std::vector<std::pair<std::size_t, std::size_t>> pairs(n);
                  for (std::size_t u = 0; u < n; ++u) pairs[u] = {label_rank[v * n + u], colors[u]};
                  std::sort(pairs.begin(), pairs.end());
                  Key key;
                  key.reserve(1 + 2 * n);
                  key.push_back(colors[v]);
                  for (const auto& [l, c] : pairs) {
                    key.push_back(l);
                    key.push_back(c);
                  }
                  return key;
                });
}

std::string graph_fingerprint(const ColorPartition& part) {
  std::string fp = "labels{" + part.label_table + "}";
  for (std::size_t t = 0; t < part.signatures.size(); ++t) {
    fp += "|r" + std::to_string(t) + "{" + part.signatures[t] + "}";
  }
  return fp;
}

std::string partition_to_json(const ColorPartition& part) {
  const nlohmann::json j = {{"rounds", part.round},
                            {"stable", part.stable},
                            {"num_colors", part.num_colors()},
                            {"history", part.history},
                            {"fingerprint", graph_fingerprint(part)}};
  return j.dump(2);
}

}  // namespace ppgt
