#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "ppgt/layers.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

enum class AttentionKind { sdp, cosine, sl2, sl2_urpe };

std::string_view to_string(AttentionKind kind);
AttentionKind parse_attention_kind(std::string_view name);

/// Weight init of the URPE maps phi and theta: `backbone` follows the other
/// backbone linears (truncated normal, sigma 0.02); `kaiming` uses
/// Kaiming-uniform with a = 1.
enum class UrpeInit { backbone, kaiming };

std::string_view to_string(UrpeInit init);
UrpeInit parse_urpe_init(std::string_view name);

/// Multi-head self-attention over model width heads * head_dim. Projections
/// are [Dm, H*D] (wo: [H*D, Dm]). For sl2-urpe, `phi` and `theta` map each
/// pair feature p_ij of width D_pe to one value per head.
struct AttentionParams {
  AttentionKind kind = AttentionKind::sl2_urpe;
  std::size_t heads = 1;
  std::size_t head_dim = 1;
  Linear wq;
  Linear wk;
  Linear wv;
  Linear wo;
  std::optional<Linear> phi;
  std::optional<Linear> theta;
  /// Cosine attention temperature.
  double tau = 1.0;
  /// Rate for dropout on the attention weights; applied only when a
  /// generator is passed to multi_head.
  double dropout = 0.0;

  std::size_t model_dim() const { return heads * head_dim; }

  /// Projections ~ truncated normal(0.02), biases 0. phi and theta weights
  /// per `urpe_init`; phi bias 1, theta bias 0.
  static AttentionParams init(AttentionKind kind, std::size_t model_dim, std::size_t heads,
                              std::size_t pe_dim, Rng& rng,
                              UrpeInit urpe_init = UrpeInit::backbone);
};

/// Allowed (i, j) pairs, row-major n x n. Masked pairs get theta-logit -inf
/// and phi value 0.
struct PairMask {
  std::size_t n = 0;
  std::vector<unsigned char> allowed;

  static PairMask full(std::size_t n);
};

/// q k^T / sqrt(D).
Tensor sdp_logits(const Tensor& q, const Tensor& k);
/// q k^T / sqrt(D) - (k_j . k_j) / (2 sqrt(D)), the second term a per-key
/// bias broadcast over rows.
Tensor sl2_logits(const Tensor& q, const Tensor& k);
/// cos(q_i, k_j) / tau; a zero-norm row of q or k is an error.
Tensor cosine_logits(const Tensor& q, const Tensor& k, double tau);

Tensor sdp_scores(const Tensor& q, const Tensor& k);
Tensor sl2_scores(const Tensor& q, const Tensor& k);
Tensor cosine_scores(const Tensor& q, const Tensor& k, double tau);

/// x: [n, Dm]; p: [n, n, D_pe] stem output, required for sl2-urpe and
/// ignored otherwise.
Tensor multi_head(const Tensor& x, const std::optional<Tensor>& p, const AttentionParams& params,
                  const PairMask* mask = nullptr, Rng* dropout_rng = nullptr);

/// multi_head restricted to kind sl2-urpe.
Tensor sl2_urpe_attention(const Tensor& x, const Tensor& p, const AttentionParams& params,
                          const PairMask* mask = nullptr);

}  // namespace ppgt
