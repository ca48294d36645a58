#include "ppgt/model.hpp"

#include "ppgt/ops.hpp"
#include "ppgt/positional_encoding.hpp"

namespace ppgt {
namespace {

constexpr double kSigma = 0.02;

template <class Params, class Fn>
void visit_linear(const std::string& name, Params& layer, Fn& fn) {
  fn(name + ".weight", layer.weight);
  fn(name + ".bias", layer.bias);
}

template <class Params, class Fn>
void visit_norm(const std::string& name, Params& norm, Fn& fn) {
  switch (norm.kind) {
    case NormKind::ln:
    case NormKind::bn:
      fn(name + ".gamma", norm.gamma);
      fn(name + ".beta", norm.beta);
      break;
    case NormKind::rmsn: fn(name + ".gamma", norm.gamma); break;
    case NormKind::adarmsn:
      fn(name + ".alpha", norm.alpha);
      fn(name + ".beta", norm.beta);
      break;
  }
}

template <class Params, class Fn>
void visit_all(Params& p, Fn& fn) {
  visit_linear("node_stem.input_fc", p.node_stem.input_fc, fn);
  visit_linear("node_stem.diag_fc", p.node_stem.diag_fc, fn);
  visit_linear("pe_stem.mlp.fc1", p.pe_stem.input_mlp.fc1, fn);
  visit_linear("pe_stem.mlp.fc2", p.pe_stem.input_mlp.fc2, fn);
  if (p.pe_stem.edge_fc) visit_linear("pe_stem.edge_fc", *p.pe_stem.edge_fc, fn);
  for (std::size_t i = 0; i < p.pe_stem.ffn.size(); ++i) {
    const std::string base = "pe_stem.ffn." + std::to_string(i);
    visit_norm(base + ".norm", p.pe_stem.ffn[i].norm, fn);
    visit_linear(base + ".fc1", p.pe_stem.ffn[i].mlp.fc1, fn);
    visit_linear(base + ".fc2", p.pe_stem.ffn[i].mlp.fc2, fn);
  }
  visit_norm("pe_stem.norm", p.pe_stem.norm, fn);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string base = "layers." + std::to_string(l);
    visit_norm(base + ".norm1", layer.norm1, fn);
    visit_linear(base + ".attn.wq", layer.attn.wq, fn);
    visit_linear(base + ".attn.wk", layer.attn.wk, fn);
    visit_linear(base + ".attn.wv", layer.attn.wv, fn);
    visit_linear(base + ".attn.wo", layer.attn.wo, fn);
    if (layer.attn.phi) visit_linear(base + ".attn.phi", *layer.attn.phi, fn);
    if (layer.attn.theta) visit_linear(base + ".attn.theta", *layer.attn.theta, fn);
    visit_norm(base + ".norm2", layer.norm2, fn);
    visit_linear(base + ".mlp.fc1", layer.mlp.fc1, fn);
    visit_linear(base + ".mlp.fc2", layer.mlp.fc2, fn);
  }
  visit_norm("final_norm", p.final_norm, fn);
  for (std::size_t i = 0; i < p.head.size(); ++i) visit_linear("head." + std::to_string(i), p.head[i], fn);
}

Tensor head_mlp(const Tensor& x, const std::vector<Linear>& head) {
  Tensor h = x;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i > 0) h = ops::relu(h);
    h = linear(h, head[i]);
  }
  return h;
}

}  // namespace

std::string_view to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::sum: return "sum";
    case Pooling::mean: return "mean";
    case Pooling::node: return "node";
  }
  return "?";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "sum") return Pooling::sum;
  if (name == "mean") return Pooling::mean;
  if (name == "node") return Pooling::node;
  throw Error("unknown pooling '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (dim == 0) throw Error("config: dim must be positive");
  if (heads == 0 || dim % heads != 0) {
    throw Error("config: dim " + std::to_string(dim) + " is not divisible by heads " +
                std::to_string(heads));
  }
  if (ffn_expansion == 0) throw Error("config: ffn_expansion must be positive");
  if (walk_steps == 0) throw Error("config: walk_steps must be >= 1");
  if (pe_dim == 0) throw Error("config: pe_dim must be positive");
  if (out_dim == 0) throw Error("config: out_dim must be positive");
  if (head_depth == 0 && out_dim != dim) {
    throw Error("config: head_depth 0 (identity head) needs out_dim == dim");
  }
  if (!(eps >= 0.0)) throw Error("config: eps must be >= 0");
  if (!(tau > 0.0)) throw Error("config: tau must be positive");
  if (!(attn_dropout >= 0.0 && attn_dropout < 1.0)) {
    throw Error("config: attn_dropout must be in [0, 1)");
  }
}

ModelParams init_params(const ModelConfig& config) {
  config.validate();
  const Rng root(config.seed);
  ModelParams p;

  Rng stem_rng = root.split("node_stem");
  p.node_stem = NodeStemParams::init(config.node_attr_dim, config.walk_steps, config.dim, stem_rng);
  Rng pe_rng = root.split("pe_stem");
  p.pe_stem = PeStemParams::init(config.pe_in_channels(), config.edge_attr_dim, config.pe_dim,
                                 config.stem_ffn, config.pe_dim * config.ffn_expansion,
                                 config.norm, config.eps, pe_rng);

  const std::size_t hidden = config.dim * config.ffn_expansion;
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    Rng rng = root.split("layer." + std::to_string(l));
    LayerParams layer;
    layer.norm1 = NormParams::init(config.norm, config.dim, config.eps);
    layer.attn = AttentionParams::init(config.attention, config.dim, config.heads, config.pe_dim, rng,
                                        config.urpe_init);
    layer.attn.tau = config.tau;
    layer.attn.dropout = config.attn_dropout;
    layer.norm2 = NormParams::init(config.norm, config.dim, config.eps);
    layer.mlp.fc1 = Linear::truncated_normal(config.dim, hidden, kSigma, rng);
    layer.mlp.fc2 = Linear::truncated_normal(hidden, config.dim, kSigma, rng);
    p.layers.push_back(std::move(layer));
  }
  p.final_norm = NormParams::init(config.norm, config.dim, config.eps);

  Rng head_rng = root.split("head");
  for (std::size_t i = 0; i < config.head_depth; ++i) {
    const std::size_t out = i + 1 == config.head_depth ? config.out_dim : config.dim;
    p.head.push_back(Linear::truncated_normal(config.dim, out, kSigma, head_rng));
  }
  return p;
}

void for_each_param(ModelParams& params,
                    const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_all(params, fn);
}

void for_each_param(const ModelParams& params,
                    const std::function<void(const std::string&, const Tensor&)>& fn) {
  visit_all(params, fn);
}

std::vector<Tensor*> parameter_list(ModelParams& params) {
  std::vector<Tensor*> out;
  for_each_param(params, [&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

ModelInputs prepare_inputs(const Graph& g, const ModelConfig& config) {
  if (g.num_nodes() == 0) throw Error("model: empty graph");
  if (g.node_attr_dim() != config.node_attr_dim) {
    throw ShapeError("model: graph has " + std::to_string(g.node_attr_dim()) +
                     " node attributes, config expects " + std::to_string(config.node_attr_dim));
  }
  if (g.edge_attr_dim() != config.edge_attr_dim) {
    throw ShapeError("model: graph has " + std::to_string(g.edge_attr_dim()) +
                     " edge attributes, config expects " + std::to_string(config.edge_attr_dim));
  }
  const RelPosTensor raw = rrwp(g, config.walk_steps);
  const AuxFeatures aux = inject_aux_features(g, spe_encode(raw, config.spe_bases));

  ModelInputs in;
  in.n = g.num_nodes();
  in.pair = aux.pair.to_tensor();
  in.diag = raw.diagonal();
  in.node_aux = aux.node_aux;
  if (config.node_attr_dim > 0) in.node_attrs = Tensor({in.n, config.node_attr_dim}, g.node_attrs());
  if (config.edge_attr_dim > 0) in.edge_attrs = dense_edge_attrs(g);
  return in;
}

Tensor block_forward(const Tensor& x, const std::optional<Tensor>& p, const LayerParams& layer,
                     const ForwardOptions& options) {
  const Tensor x_hat =
      x + multi_head(normalize(x, layer.norm1), p, layer.attn, options.mask, options.dropout_rng);
  return x_hat + mlp(normalize(x_hat, layer.norm2), layer.mlp);
}

Tensor model_forward(const ModelInputs& inputs, const ModelConfig& config,
                     const ModelParams& params, const ForwardOptions& options) {
  if (params.layers.size() != config.n_layers) {
    throw Error("model: params have " + std::to_string(params.layers.size()) +
                " layers, config expects " + std::to_string(config.n_layers));
  }
  std::optional<Tensor> p;
  if (config.attention == AttentionKind::sl2_urpe) {
    p = pe_stem_forward(inputs.pair, inputs.edge_attrs, params.pe_stem);
  }
  Tensor x = node_stem_forward(inputs.node_attrs, inputs.diag, inputs.node_aux, params.node_stem);
  for (const auto& layer : params.layers) x = block_forward(x, p, layer, options);
  return normalize(x, params.final_norm);
}

Tensor model_forward(const Graph& g, const ModelConfig& config, const ModelParams& params) {
  return model_forward(prepare_inputs(g, config), config, params);
}

Tensor pool(const Tensor& y, Pooling pooling) {
  if (y.rank() != 2) throw ShapeError("pool: expected [n, D], got " + shape_str(y.shape()));
  if (y.dim(0) == 0) throw Error("pool: empty graph");
  switch (pooling) {
    case Pooling::sum: return ops::sum(y, 0);
    case Pooling::mean: return ops::mean(y, 0);
    case Pooling::node: break;
  }
  throw Error("pool: node pooling has no graph-level readout");
}

Tensor graph_head(const Tensor& y, const ModelConfig& config, const ModelParams& params) {
  if (config.pooling == Pooling::node) throw Error("graph_head: config uses node pooling");
  return head_mlp(pool(y, config.pooling), params.head);
}

Tensor node_head(const Tensor& y, const std::vector<Linear>& head) { return head_mlp(y, head); }

}  // namespace ppgt
