#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ppgt/graph.hpp"
#include "ppgt/rational.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

enum class RelPosKind { raw_rrwp, spe_expanded, stem_output };

std::string_view to_string(RelPosKind kind);
RelPosKind parse_relpos_kind(std::string_view name);

/// N x N x K relative positional features, row-major as [i][j][c].
struct RelPosTensor {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> data;
  RelPosKind kind = RelPosKind::raw_rrwp;

  double at(std::size_t i, std::size_t j, std::size_t c) const { return data[(i * n + j) * k + c]; }
  /// [n, n, k]
  Tensor to_tensor() const;
  /// Entries (i, i, :) as [n, k].
  Tensor diagonal() const;
};

struct RandomWalk {
  RationalMatrix exact;
  Tensor dense;
};

/// W = D^-1 A; rows of degree-0 nodes are all zero.
RandomWalk random_walk_matrix(const Graph& g);

/// [I, W, ..., W^(K-1)] in exact arithmetic.
std::vector<RationalMatrix> rrwp_exact(const Graph& g, std::size_t walk_steps);

/// [I, W, ..., W^(K-1)] stacked along channels, computed in f64.
RelPosTensor rrwp(const Graph& g, std::size_t walk_steps);

/// Elementwise sinusoidal expansion: each channel value p becomes
/// [p, sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^(S-1) pi p), cos(2^(S-1) pi p)],
/// grouped per input channel, so K channels become K (1 + 2S). S = 0 is a
/// pass-through.
RelPosTensor spe_encode(const RelPosTensor& p, std::size_t bases);

struct AuxFeatures {
  /// [n, 2]: log(deg + 1), log n
  Tensor node_aux;
  /// Input channels followed by 1/max(deg_i, 1), 1/max(deg_j, 1), 1/n.
  RelPosTensor pair;
};

AuxFeatures inject_aux_features(const Graph& g, const RelPosTensor& p);

}  // namespace ppgt
