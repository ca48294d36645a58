#include "ppgt/attention.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ppgt/ops.hpp"

namespace ppgt {
namespace {

void check_qk(const Tensor& q, const Tensor& k) {
  if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) {
    throw ShapeError("attention: query " + shape_str(q.shape()) + " vs key " +
                     shape_str(k.shape()));
  }
}

Tensor unit_rows(const Tensor& x) {
  const Tensor norms = ops::l2norm_last(x);
  for (std::size_t i = 0; i < norms.numel(); ++i) {
    if (norms[i] == 0.0) throw Error("cosine attention: zero-norm row " + std::to_string(i));
  }
  return x / ops::expand_last(norms, x.dim(1));
}

}  // namespace

std::string_view to_string(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::sdp: return "sdp";
    case AttentionKind::cosine: return "cosine";
    case AttentionKind::sl2: return "sl2";
    case AttentionKind::sl2_urpe: return "sl2-urpe";
  }
  return "?";
}

AttentionKind parse_attention_kind(std::string_view name) {
  if (name == "sdp") return AttentionKind::sdp;
  if (name == "cosine") return AttentionKind::cosine;
  if (name == "sl2") return AttentionKind::sl2;
  if (name == "sl2-urpe") return AttentionKind::sl2_urpe;
  throw Error("unknown attention kind '" + std::string(name) + "'");
}

std::string_view to_string(UrpeInit init) {
  return init == UrpeInit::backbone ? "backbone" : "kaiming";
}

UrpeInit parse_urpe_init(std::string_view name) {
  if (name == "backbone") return UrpeInit::backbone;
  if (name == "kaiming") return UrpeInit::kaiming;
  throw Error("unknown URPE init '" + std::string(name) + "'");
}

AttentionParams AttentionParams::init(AttentionKind kind, std::size_t model_dim, std::size_t heads,
                                      std::size_t pe_dim, Rng& rng, UrpeInit urpe_init) {
  if (heads == 0 || model_dim % heads != 0) {
    throw Error("attention: model dim " + std::to_string(model_dim) + " not divisible by " +
                std::to_string(heads) + " heads");
  }
  constexpr double sigma = 0.02;
  AttentionParams p;
  p.kind = kind;
  p.heads = heads;
  p.head_dim = model_dim / heads;
  p.wq = Linear::truncated_normal(model_dim, model_dim, sigma, rng);
  p.wk = Linear::truncated_normal(model_dim, model_dim, sigma, rng);
  p.wv = Linear::truncated_normal(model_dim, model_dim, sigma, rng);
  p.wo = Linear::truncated_normal(model_dim, model_dim, sigma, rng);
  if (kind == AttentionKind::sl2_urpe) {
    auto make = [&] {
      Linear l = urpe_init == UrpeInit::backbone ? Linear::truncated_normal(pe_dim, heads, sigma, rng)
                                                 : Linear::kaiming_uniform(pe_dim, heads, 1.0, rng);
      l.bias = Tensor::parameter({heads}, std::vector<double>(heads, 0.0));
      return l;
    };
    p.phi = make();
    p.phi->bias = Tensor::parameter({heads}, std::vector<double>(heads, 1.0));
    p.theta = make();
  }
  return p;
}

PairMask PairMask::full(std::size_t n) { return {n, std::vector<unsigned char>(n * n, 1)}; }

Tensor sdp_logits(const Tensor& q, const Tensor& k) {
  check_qk(q, k);
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.dim(1)));
  return ops::matmul(q, ops::transpose(k)) * inv;
}

Tensor sl2_logits(const Tensor& q, const Tensor& k) {
  check_qk(q, k);
  const double root = std::sqrt(static_cast<double>(q.dim(1)));
  // Per-key bias of shape [n_k]; broadcasting it over [n_q, n_k] adds it to
  // every row.
  const Tensor key_bias = ops::sum(ops::square(k), 1) * (-0.5 / root);
  return ops::matmul(q, ops::transpose(k)) * (1.0 / root) + key_bias;
}

Tensor cosine_logits(const Tensor& q, const Tensor& k, double tau) {
  check_qk(q, k);
  if (!(tau > 0.0)) throw Error("cosine attention: tau must be positive");
  return ops::matmul(unit_rows(q), ops::transpose(unit_rows(k))) * (1.0 / tau);
}

Tensor sdp_scores(const Tensor& q, const Tensor& k) { return ops::softmax_rows(sdp_logits(q, k)); }
Tensor sl2_scores(const Tensor& q, const Tensor& k) { return ops::softmax_rows(sl2_logits(q, k)); }
Tensor cosine_scores(const Tensor& q, const Tensor& k, double tau) {
  return ops::softmax_rows(cosine_logits(q, k, tau));
}

Tensor multi_head(const Tensor& x, const std::optional<Tensor>& p, const AttentionParams& params,
                  const PairMask* mask, Rng* dropout_rng) {
  const std::size_t dm = params.model_dim();
  if (x.rank() != 2 || x.dim(1) != dm) {
    throw ShapeError("attention: input " + shape_str(x.shape()) + " for model dim " +
                     std::to_string(dm));
  }
  const std::size_t n = x.dim(0);
  const bool urpe = params.kind == AttentionKind::sl2_urpe;

  std::optional<Tensor> mask_bias;
  std::optional<Tensor> mask_keep;
  if (mask) {
    if (mask->n != n || mask->allowed.size() != n * n) {
      throw ShapeError("attention: pair mask for " + std::to_string(mask->n) + " nodes, input has " +
                       std::to_string(n));
    }
    std::vector<double> bias(n * n);
    std::vector<double> keep(n * n);
    for (std::size_t ij = 0; ij < n * n; ++ij) {
      bias[ij] = mask->allowed[ij] ? 0.0 : -std::numeric_limits<double>::infinity();
      keep[ij] = mask->allowed[ij] ? 1.0 : 0.0;
    }
    mask_bias = Tensor({n, n}, std::move(bias));
    mask_keep = Tensor({n, n}, std::move(keep));
  }

  std::optional<Tensor> phi_all;
  std::optional<Tensor> theta_all;
  if (urpe) {
    if (!p) throw Error("sl2-urpe attention needs pair features");
    if (!params.phi || !params.theta) throw Error("sl2-urpe attention needs phi and theta");
    if (p->rank() != 3 || p->dim(0) != n || p->dim(1) != n) {
      throw ShapeError("attention: pair features " + shape_str(p->shape()) + " for " +
                       std::to_string(n) + " nodes");
    }
    phi_all = linear(*p, *params.phi);      // [n, n, H]
    theta_all = linear(*p, *params.theta);  // [n, n, H]
  }

  const Tensor q = linear(x, params.wq);
  const Tensor k = linear(x, params.wk);
  const Tensor v = linear(x, params.wv);

  std::vector<Tensor> heads;
  heads.reserve(params.heads);
  const std::size_t d = params.head_dim;
  for (std::size_t h = 0; h < params.heads; ++h) {
    const Tensor qh = ops::slice_last(q, h * d, (h + 1) * d);
    const Tensor kh = ops::slice_last(k, h * d, (h + 1) * d);
    const Tensor vh = ops::slice_last(v, h * d, (h + 1) * d);

    Tensor logits;
    switch (params.kind) {
      case AttentionKind::sdp: logits = sdp_logits(qh, kh); break;
      case AttentionKind::cosine: logits = cosine_logits(qh, kh, params.tau); break;
      case AttentionKind::sl2:
      case AttentionKind::sl2_urpe: logits = sl2_logits(qh, kh); break;
      default: throw Error("unknown attention kind");
    }
    if (urpe) logits = logits + ops::reshape(ops::slice_last(*theta_all, h, h + 1), {n, n});

    Tensor alpha = ops::softmax_rows(logits, mask_bias);
    if (urpe) {
      Tensor phi = ops::reshape(ops::slice_last(*phi_all, h, h + 1), {n, n});
      if (mask_keep) phi = phi * *mask_keep;
      alpha = phi * alpha;
    }
    if (dropout_rng && params.dropout > 0.0) {
      std::vector<unsigned char> keep(n * n);
      for (auto& b : keep) b = dropout_rng->uniform() >= params.dropout ? 1 : 0;
      alpha = ops::dropout(alpha, params.dropout, keep);
    }
    heads.push_back(ops::matmul(alpha, vh));
  }
  return linear(ops::concat_last(heads), params.wo);
}

Tensor sl2_urpe_attention(const Tensor& x, const Tensor& p, const AttentionParams& params,
                          const PairMask* mask) {
  if (params.kind != AttentionKind::sl2_urpe) {
    throw Error("sl2_urpe_attention: params are for " + std::string(to_string(params.kind)));
  }
  return multi_head(x, p, params, mask);
}

}  // namespace ppgt
