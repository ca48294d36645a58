#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ppgt/graph.hpp"
#include "ppgt/layers.hpp"
#include "ppgt/normalization.hpp"
#include "ppgt/positional_encoding.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

/// Pair-level stem: Norm(FFN^n(FC(e_ij) + MLP(p_ij))).
struct PeStemParams {
  Mlp input_mlp;
  std::optional<Linear> edge_fc;
  std::vector<FeedForward> ffn;
  NormParams norm;

  std::size_t in_channels() const { return input_mlp.fc1.in(); }
  std::size_t out_dim() const { return input_mlp.fc2.out(); }

  /// Hidden layers Kaiming-uniform (a = 0), output layers Kaiming-uniform
  /// (a = 1), norms freshly initialized.
  static PeStemParams init(std::size_t in_channels, std::size_t edge_dim, std::size_t pe_dim,
                           std::size_t n_ffn, std::size_t ffn_hidden, NormKind norm, double eps,
                           Rng& rng);
};

/// [n, n, C] pair features to [n, n, D_pe]. `edge_attrs`, when given, is the
/// dense [n, n, E] edge attribute tensor (zero where no edge exists).
Tensor pe_stem_forward(const Tensor& p, const std::optional<Tensor>& edge_attrs,
                       const PeStemParams& params);

/// Node stem: x0_i = FC(x_i || aux_i) + FC(p_ii).
struct NodeStemParams {
  Linear input_fc;
  Linear diag_fc;

  std::size_t attr_dim() const { return input_fc.in() - 2; }
  std::size_t out_dim() const { return input_fc.out(); }

  static NodeStemParams init(std::size_t attr_dim, std::size_t walk_steps, std::size_t dim,
                             Rng& rng);
};

/// `node_attrs` is [n, F] or absent (treated as zero-width); `diag` is the raw
/// RRWP diagonal [n, K]; `node_aux` is [n, 2].
Tensor node_stem_forward(const std::optional<Tensor>& node_attrs, const Tensor& diag,
                         const Tensor& node_aux, const NodeStemParams& params);

/// Dense [n, n, E] edge attributes, symmetric, zero for non-edges.
Tensor dense_edge_attrs(const Graph& g);

/// Wraps a stem output as a RelPosTensor of kind stem-output.
RelPosTensor to_relpos(const Tensor& stem_output);

}  // namespace ppgt
