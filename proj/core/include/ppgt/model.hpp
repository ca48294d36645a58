#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppgt/attention.hpp"
#include "ppgt/graph.hpp"
#include "ppgt/layers.hpp"
#include "ppgt/normalization.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/stem.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

enum class Pooling { sum, mean, node };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view name);

struct ModelConfig {
  std::size_t n_layers = 4;
  std::size_t dim = 32;
  std::size_t heads = 4;
  std::size_t ffn_expansion = 2;
  NormKind norm = NormKind::adarmsn;
  AttentionKind attention = AttentionKind::sl2_urpe;
  std::size_t walk_steps = 3;
  std::size_t spe_bases = 3;
  std::size_t pe_dim = 32;
  std::size_t stem_ffn = 1;
  Pooling pooling = Pooling::sum;
  std::size_t head_depth = 2;
  std::size_t out_dim = 1;
  std::uint64_t seed = 0;
  double attn_dropout = 0.0;
  double eps = 1e-6;
  double tau = 1.0;
  std::size_t node_attr_dim = 0;
  std::size_t edge_attr_dim = 0;
  UrpeInit urpe_init = UrpeInit::backbone;

  /// Throws Error naming the first inconsistent field.
  void validate() const;
  /// Channels entering the PE stem: K (1 + 2S) + 3.
  std::size_t pe_in_channels() const { return walk_steps * (1 + 2 * spe_bases) + 3; }
};

struct LayerParams {
  NormParams norm1;
  AttentionParams attn;
  NormParams norm2;
  Mlp mlp;
};

struct ModelParams {
  NodeStemParams node_stem;
  PeStemParams pe_stem;
  std::vector<LayerParams> layers;
  NormParams final_norm;
  /// head_depth layers with ReLU between them; empty means identity.
  std::vector<Linear> head;
};

/// Backbone and head linears ~ truncated normal(0.02) with zero biases;
/// stems as documented on their init functions; all draws derive from
/// `config.seed`.
ModelParams init_params(const ModelConfig& config);

/// Visits every trainable tensor with a stable dotted name, in a fixed order.
void for_each_param(ModelParams& params, const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_param(const ModelParams& params,
                    const std::function<void(const std::string&, const Tensor&)>& fn);
std::vector<Tensor*> parameter_list(ModelParams& params);

/// Graph-derived constant inputs of one forward pass.
struct ModelInputs {
  std::size_t n = 0;
  Tensor pair;       // [n, n, K(1+2S)+3]
  Tensor diag;       // [n, K], raw RRWP diagonal
  Tensor node_aux;   // [n, 2]
  std::optional<Tensor> node_attrs;
  std::optional<Tensor> edge_attrs;  // dense [n, n, E]
};

ModelInputs prepare_inputs(const Graph& g, const ModelConfig& config);

struct ForwardOptions {
  const PairMask* mask = nullptr;
  /// Enables attention dropout when set and the configured rate is > 0.
  Rng* dropout_rng = nullptr;
};

/// x_hat = x + MSA(Norm(x), p); out = x_hat + MLP(Norm(x_hat)).
Tensor block_forward(const Tensor& x, const std::optional<Tensor>& p, const LayerParams& layer,
                     const ForwardOptions& options = {});

/// Stems, L blocks and the final norm: node embeddings [n, Dm].
Tensor model_forward(const ModelInputs& inputs, const ModelConfig& config,
                     const ModelParams& params, const ForwardOptions& options = {});
Tensor model_forward(const Graph& g, const ModelConfig& config, const ModelParams& params);

/// Sum or mean over nodes: [n, Dm] -> [Dm].
Tensor pool(const Tensor& y, Pooling pooling);
/// Pool then head MLP; requires sum or mean pooling.
Tensor graph_head(const Tensor& y, const ModelConfig& config, const ModelParams& params);
/// Row-wise head MLP shared across nodes.
Tensor node_head(const Tensor& y, const std::vector<Linear>& head);

}  // namespace ppgt
