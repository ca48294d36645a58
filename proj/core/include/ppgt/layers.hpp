#pragma once

#include <cstddef>

#include "ppgt/normalization.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

/// y = x W + b with W: [in, out]. Inputs of any rank >= 1 ending in `in`.
struct Linear {
  Tensor weight;
  Tensor bias;

  std::size_t in() const { return weight.dim(0); }
  std::size_t out() const { return weight.dim(1); }

  static Linear zeros(std::size_t in, std::size_t out);
  /// Weights ~ truncated normal(0, sigma) within +-2 sigma, bias 0.
  static Linear truncated_normal(std::size_t in, std::size_t out, double sigma, Rng& rng);
  /// Weights ~ U(-b, b) with b = sqrt(6 / ((1 + a^2) fan_in)); bias ~
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)). a = sqrt(5) gives the common
  /// framework default for linear layers.
  static Linear kaiming_uniform(std::size_t in, std::size_t out, double a, Rng& rng);
};

Tensor linear(const Tensor& x, const Linear& layer);

/// Two fully connected layers with a ReLU in between.
struct Mlp {
  Linear fc1;
  Linear fc2;
};

Tensor mlp(const Tensor& x, const Mlp& m);

/// Pre-norm feed-forward residual: x + MLP(Norm(x)).
struct FeedForward {
  NormParams norm;
  Mlp mlp;
};

Tensor feed_forward(const Tensor& x, const FeedForward& ffn);

}  // namespace ppgt
