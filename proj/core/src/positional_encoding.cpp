#include "ppgt/positional_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ppgt {

std::string_view to_string(RelPosKind kind) {
  switch (kind) {
    case RelPosKind::raw_rrwp: return "raw-rrwp";
    case RelPosKind::spe_expanded: return "spe-expanded";
    case RelPosKind::stem_output: return "stem-output";
  }
  return "?";
}

RelPosKind parse_relpos_kind(std::string_view name) {
  if (name == "raw-rrwp") return RelPosKind::raw_rrwp;
  if (name == "spe-expanded") return RelPosKind::spe_expanded;
  if (name == "stem-output") return RelPosKind::stem_output;
  throw Error("unknown relative PE kind '" + std::string(name) + "'");
}

Tensor RelPosTensor::to_tensor() const { return Tensor({n, n, k}, data); }

Tensor RelPosTensor::diagonal() const {
  std::vector<double> d(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) d[i * k + c] = at(i, i, c);
  return Tensor({n, k}, std::move(d));
}

RandomWalk random_walk_matrix(const Graph& g) {
  const std::size_t n = g.num_nodes();
  RationalMatrix exact(n);
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = g.degree(i);
    for (std::size_t j : g.neighbors(i)) {
      exact.set(i, j, mpq_class(1, static_cast<unsigned long>(d)));
      dense[i * n + j] = 1.0 / static_cast<double>(d);
    }
  }
  return {std::move(exact), Tensor({n, n}, std::move(dense))};
}

std::vector<RationalMatrix> rrwp_exact(const Graph& g, std::size_t walk_steps) {
  if (walk_steps == 0) throw Error("rrwp: walk_steps must be >= 1");
  const auto walk = random_walk_matrix(g);
  std::vector<RationalMatrix> powers;
  powers.reserve(walk_steps);
  powers.push_back(RationalMatrix::identity(g.num_nodes()));
  for (std::size_t c = 1; c < walk_steps; ++c) powers.push_back(powers.back() * walk.exact);
  return powers;
}

RelPosTensor rrwp(const Graph& g, std::size_t walk_steps) {
  if (walk_steps == 0) throw Error("rrwp: walk_steps must be >= 1");
  const std::size_t n = g.num_nodes();
  const auto w = random_walk_matrix(g).dense.values();

  RelPosTensor out;
  out.n = n;
  out.k = walk_steps;
  out.kind = RelPosKind::raw_rrwp;
  out.data.assign(n * n * walk_steps, 0.0);

  std::vector<double> power(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) power[i * n + i] = 1.0;
  std::vector<double> next(n * n);
  for (std::size_t c = 0; c < walk_steps; ++c) {
    for (std::size_t ij = 0; ij < n * n; ++ij) out.data[ij * walk_steps + c] = power[ij];
    if (c + 1 == walk_steps) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        const double a = power[i * n + m];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) next[i * n + j] += a * w[m * n + j];
      }
    power.swap(next);
  }
  return out;
}

RelPosTensor spe_encode(const RelPosTensor& p, std::size_t bases) {
  const std::size_t width = 1 + 2 * bases;
  RelPosTensor out;
  out.n = p.n;
  out.k = p.k * width;
  out.kind = RelPosKind::spe_expanded;
  out.data.resize(p.n * p.n * out.k);
  for (std::size_t ij = 0; ij < p.n * p.n; ++ij) {
    for (std::size_t c = 0; c < p.k; ++c) {
      const double v = p.data[ij * p.k + c];
      double* dst = out.data.data() + ij * out.k + c * width;
      dst[0] = v;
      double freq = std::numbers::pi;
      for (std::size_t s = 0; s < bases; ++s) {
        dst[1 + 2 * s] = std::sin(freq * v);
        dst[2 + 2 * s] = std::cos(freq * v);
        freq *= 2.0;
      }
    }
  }
  return out;
}

AuxFeatures inject_aux_features(const Graph& g, const RelPosTensor& p) {
  const std::size_t n = g.num_nodes();
  if (p.n != n) {
    throw ShapeError("inject_aux_features: PE for " + std::to_string(p.n) + " nodes, graph has " +
                     std::to_string(n));
  }
  const double log_n = std::log(static_cast<double>(n));
  std::vector<double> node_aux(n * 2);
  std::vector<double> inv_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = static_cast<double>(g.degree(i));
    node_aux[i * 2] = std::log(d + 1.0);
    node_aux[i * 2 + 1] = log_n;
    inv_deg[i] = 1.0 / std::max(d, 1.0);
  }

  AuxFeatures aux;
  aux.node_aux = Tensor({n, 2}, std::move(node_aux));
  aux.pair.n = n;
  aux.pair.k = p.k + 3;
  aux.pair.kind = p.kind;
  aux.pair.data.resize(n * n * aux.pair.k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t ij = i * n + j;
      double* dst = aux.pair.data.data() + ij * aux.pair.k;
      std::copy_n(p.data.data() + ij * p.k, p.k, dst);
      dst[p.k] = inv_deg[i];
      dst[p.k + 1] = inv_deg[j];
      dst[p.k + 2] = inv_n;
    }
  return aux;
}

}  // namespace ppgt
