#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ppgt/tensor.hpp"

namespace ppgt {

enum class NormKind { ln, rmsn, adarmsn, bn };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

/// Parameters of one token-wise (or batch) normalization layer over the last
/// axis of width `dim`.
///
///   ln      : gamma, beta
///   rmsn    : gamma
///   adarmsn : alpha, beta   (no separate gamma)
///   bn      : gamma, beta, running statistics
struct NormParams {
  NormKind kind = NormKind::adarmsn;
  std::size_t dim = 0;
  Tensor gamma;
  Tensor beta;
  Tensor alpha;
  double eps = 1e-6;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;

  /// Fresh layer: gamma = 1, beta = 0 (ln, bn); gamma = 1 (rmsn);
  /// alpha = 0, beta = 1 (adarmsn); running mean 0 and variance 1 (bn).
  static NormParams init(NormKind kind, std::size_t dim, double eps = 1e-6);
};

/// (x - mean) / sqrt(var + eps) * gamma + beta, per token.
Tensor layer_norm(const Tensor& x, const NormParams& params);

/// x / max(||x|| / sqrt(D), eps) * gamma.
Tensor rmsn(const Tensor& x, const NormParams& params);

/// x / max(||x|| / sqrt(D), eps) * ||alpha * x + beta|| / sqrt(D).
///
/// With alpha = 0, beta = 1 this is RMSN with unit gamma; with alpha = 1,
/// beta = 0 it is the identity. The output at x = 0 is 0.
Tensor ada_rmsn(const Tensor& x, const NormParams& params);

/// BatchNorm over axis 0 of a [B, D] tensor. Training mode normalizes with
/// the (biased) batch statistics and updates the running estimates with
/// `momentum`, using the unbiased batch variance; eval mode uses the running
/// estimates. Training with B < 2 throws Error("degenerate batch").
Tensor batch_norm_1d(const Tensor& x, NormParams& params, bool training);

/// Dispatch on `params.kind`. BatchNorm runs in eval mode here since the
/// parameters are read-only.
Tensor normalize(const Tensor& x, const NormParams& params);

}  // namespace ppgt
