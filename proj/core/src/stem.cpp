#include "ppgt/stem.hpp"

#include <string>

#include "ppgt/ops.hpp"

namespace ppgt {

PeStemParams PeStemParams::init(std::size_t in_channels, std::size_t edge_dim, std::size_t pe_dim,
                                std::size_t n_ffn, std::size_t ffn_hidden, NormKind norm,
                                double eps, Rng& rng) {
  PeStemParams p;
  p.input_mlp.fc1 = Linear::kaiming_uniform(in_channels, pe_dim, 0.0, rng);
  p.input_mlp.fc2 = Linear::kaiming_uniform(pe_dim, pe_dim, 1.0, rng);
  if (edge_dim > 0) p.edge_fc = Linear::kaiming_uniform(edge_dim, pe_dim, 1.0, rng);
  for (std::size_t i = 0; i < n_ffn; ++i) {
    FeedForward f;
    f.norm = NormParams::init(norm, pe_dim, eps);
    f.mlp.fc1 = Linear::kaiming_uniform(pe_dim, ffn_hidden, 0.0, rng);
    f.mlp.fc2 = Linear::kaiming_uniform(ffn_hidden, pe_dim, 1.0, rng);
    p.ffn.push_back(std::move(f));
  }
  p.norm = NormParams::init(norm, pe_dim, eps);
  return p;
}

Tensor pe_stem_forward(const Tensor& p, const std::optional<Tensor>& edge_attrs,
                       const PeStemParams& params) {
  if (p.rank() != 3 || p.dim(0) != p.dim(1)) {
    throw ShapeError("pe_stem_forward: expected [n,n,C], got " + shape_str(p.shape()));
  }
  if (p.dim(2) != params.in_channels()) {
    throw ShapeError("pe_stem_forward: input has " + std::to_string(p.dim(2)) +
                     " channels, stem expects " + std::to_string(params.in_channels()));
  }
  Tensor h = mlp(p, params.input_mlp);
  if (edge_attrs) {
    if (!params.edge_fc) throw ShapeError("pe_stem_forward: edge attributes given but no edge FC");
    if (edge_attrs->rank() != 3 || edge_attrs->dim(0) != p.dim(0) ||
        edge_attrs->dim(1) != p.dim(1)) {
      throw ShapeError("pe_stem_forward: edge attributes " + shape_str(edge_attrs->shape()) +
                       " vs PE " + shape_str(p.shape()));
    }
    h = h + linear(*edge_attrs, *params.edge_fc);
  } else if (params.edge_fc) {
    // Missing attributes are zero, so FC(e) reduces to its bias.
    h = h + params.edge_fc->bias;
  }
  for (const auto& f : params.ffn) h = feed_forward(h, f);
  return normalize(h, params.norm);
}

NodeStemParams NodeStemParams::init(std::size_t attr_dim, std::size_t walk_steps, std::size_t dim,
                                    Rng& rng) {
  return {Linear::kaiming_uniform(attr_dim + 2, dim, 1.0, rng),
          Linear::kaiming_uniform(walk_steps, dim, 1.0, rng)};
}

Tensor node_stem_forward(const std::optional<Tensor>& node_attrs, const Tensor& diag,
                         const Tensor& node_aux, const NodeStemParams& params) {
  if (diag.rank() != 2 || node_aux.rank() != 2 || diag.dim(0) != node_aux.dim(0) ||
      node_aux.dim(1) != 2) {
    throw ShapeError("node_stem_forward: diagonal " + shape_str(diag.shape()) + " vs aux " +
                     shape_str(node_aux.shape()));
  }
  Tensor input = node_aux;
  if (node_attrs) {
    if (node_attrs->rank() != 2 || node_attrs->dim(0) != diag.dim(0)) {
      throw ShapeError("node_stem_forward: node attributes " + shape_str(node_attrs->shape()) +
                       " for " + std::to_string(diag.dim(0)) + " nodes");
    }
    const Tensor parts[] = {*node_attrs, node_aux};
    input = ops::concat_last(parts);
  } else if (params.attr_dim() > 0) {
    const Tensor parts[] = {Tensor::zeros({diag.dim(0), params.attr_dim()}), node_aux};
    input = ops::concat_last(parts);
  }
  return linear(input, params.input_fc) + linear(diag, params.diag_fc);
}

Tensor dense_edge_attrs(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const std::size_t e = g.edge_attr_dim();
  std::vector<double> dense(n * n * e, 0.0);
  const auto& attrs = g.edge_attrs();
  const auto& edges = g.edges();
  for (std::size_t idx = 0; idx < edges.size(); ++idx) {
    const auto [u, v] = edges[idx];
    for (std::size_t c = 0; c < e; ++c) {
      const double a = attrs[idx * e + c];
      dense[(u * n + v) * e + c] = a;
      dense[(v * n + u) * e + c] = a;
    }
  }
  return Tensor({n, n, e}, std::move(dense));
}

RelPosTensor to_relpos(const Tensor& stem_output) {
  if (stem_output.rank() != 3 || stem_output.dim(0) != stem_output.dim(1)) {
    throw ShapeError("to_relpos: expected [n,n,D], got " + shape_str(stem_output.shape()));
  }
  return {stem_output.dim(0), stem_output.dim(2), stem_output.values(), RelPosKind::stem_output};
}

}  // namespace ppgt
