#include <gtest/gtest.h>

#include <cmath>

#include "ppgt/gradcheck.hpp"
#include "ppgt/normalization.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/rng.hpp"
#include "test_util.hpp"

namespace ppgt {
namespace {

using test::max_abs_diff;
using test::random_tensor;

TEST(NormParams, InitContracts) {
  const NormParams a = NormParams::init(NormKind::adarmsn, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.alpha[i], 0.0);
    EXPECT_EQ(a.beta[i], 1.0);
  }
  const NormParams b = NormParams::init(NormKind::bn, 3);
  EXPECT_EQ(b.running_mean, std::vector<double>(3, 0.0));
  EXPECT_EQ(b.running_var, std::vector<double>(3, 1.0));
  EXPECT_EQ(b.momentum, 0.1);
  EXPECT_THROW(NormParams::init(NormKind::ln, 3, -1.0), Error);
}

TEST(NormKind, NamesRoundTrip) {
  for (auto k : {NormKind::ln, NormKind::rmsn, NormKind::adarmsn, NormKind::bn}) {
    EXPECT_EQ(parse_norm_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_norm_kind("groupnorm"), Error);
}

TEST(LayerNorm, ZeroMeanUnitRmsIsFixed) {
  const NormParams p = NormParams::init(NormKind::ln, 2, 0.0);
  const Tensor y = layer_norm(Tensor({2}, {1.0, -1.0}), p);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], -1.0);
}

TEST(LayerNorm, ConstantVectorGivesBeta) {
  NormParams p = NormParams::init(NormKind::ln, 3, 1e-6);
  p.beta = Tensor({3}, {0.5, -2.0, 3.0});
  const Tensor y = layer_norm(Tensor::full({2, 3}, 7.0), p);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(y[i], p.beta[i % 3]);
}

TEST(LayerNorm, DimensionMismatchThrows) {
  const NormParams p = NormParams::init(NormKind::ln, 3);
  EXPECT_THROW(layer_norm(Tensor::zeros({2, 4}), p), ShapeError);
  EXPECT_THROW(rmsn(Tensor::zeros({4}), NormParams::init(NormKind::rmsn, 3)), ShapeError);
  EXPECT_THROW(ada_rmsn(Tensor::zeros({4}), NormParams::init(NormKind::adarmsn, 3)), ShapeError);
  EXPECT_THROW(rmsn(Tensor::zeros({3}), p), Error);
}

TEST(Rmsn, ThreeFour) {
  const Tensor y = rmsn(Tensor({2}, {3.0, 4.0}), NormParams::init(NormKind::rmsn, 2, 0.0));
  EXPECT_NEAR(y[0], 3.0 * std::sqrt(2.0) / 5.0, 1e-15);
  EXPECT_NEAR(y[1], 4.0 * std::sqrt(2.0) / 5.0, 1e-15);
}

TEST(Rmsn, ZeroInputGivesZero) {
  const Tensor y = rmsn(Tensor::zeros({4}), NormParams::init(NormKind::rmsn, 4, 1e-6));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(AdaRmsn, ThreeFourWithBeta) {
  NormParams p = NormParams::init(NormKind::adarmsn, 2, 0.0);
  p.beta = Tensor({2}, {2.0, 0.0});
  const Tensor y = ada_rmsn(Tensor({2}, {3.0, 4.0}), p);
  EXPECT_NEAR(y[0], 1.2, 1e-15);
  EXPECT_NEAR(y[1], 1.6, 1e-15);
}

TEST(AdaRmsn, ZeroInputGivesZero) {
  const Tensor y = ada_rmsn(Tensor::zeros({3}), NormParams::init(NormKind::adarmsn, 3));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(AdaRmsn, InitEqualsRmsn) {
  Rng rng(40);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.index(32);
    const Tensor x = random_tensor({1 + rng.index(4), d}, rng, -5.0, 5.0);
    EXPECT_LT(max_abs_diff(ada_rmsn(x, NormParams::init(NormKind::adarmsn, d)),
                           rmsn(x, NormParams::init(NormKind::rmsn, d))),
              1e-12);
  }
}

TEST(AdaRmsn, RecoversIdentity) {
  Rng rng(41);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.index(32);
    NormParams p = NormParams::init(NormKind::adarmsn, d);
    p.alpha = Tensor::full({d}, 1.0);
    p.beta = Tensor::zeros({d});
    const Tensor x = random_tensor({2, d}, rng, -5.0, 5.0);
    EXPECT_LT(max_abs_diff(ada_rmsn(x, p), x), 1e-12);
  }
}

TEST(MagnitudeInvariance, LnAndRmsn) {
  Rng rng(42);
  for (auto kind : {NormKind::ln, NormKind::rmsn}) {
    for (int t = 0; t < 300; ++t) {
      const std::size_t d = 2 + rng.index(31);
      NormParams p = NormParams::init(kind, d, 0.0);
      p.gamma = random_tensor({d}, rng);
      if (kind == NormKind::ln) p.beta = random_tensor({d}, rng);
      const Tensor x = random_tensor({d}, rng);
      const Tensor y = normalize(x, p);
      for (double c : {0.5, 2.0, 10.0}) {
        EXPECT_LT(max_abs_diff(normalize(x * c, p), y), 1e-12) << to_string(kind);
      }
    }
  }
}

TEST(MagnitudeInvariance, AdaRmsnWitnessBreaksIt) {
  NormParams p = NormParams::init(NormKind::adarmsn, 3, 0.0);
  p.alpha = Tensor::full({3}, 1.0);
  p.beta = Tensor::full({3}, 1.0);
  const Tensor x({3}, {0.3, -0.2, 0.9});
  EXPECT_GT(max_abs_diff(ada_rmsn(x * 2.0, p), ada_rmsn(x, p)), 1e-3);
}

TEST(BatchNorm, IdenticalRowsGiveBeta) {
  NormParams p = NormParams::init(NormKind::bn, 2);
  p.beta = Tensor({2}, {0.25, -0.5});
  const Tensor y = batch_norm_1d(Tensor::full({4, 2}, 3.0), p, true);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(y[i], p.beta[i % 2]);
}

TEST(BatchNorm, EvalWithFreshStatsIsNearIdentity) {
  NormParams p = NormParams::init(NormKind::bn, 3);
  Rng rng(43);
  const Tensor x = random_tensor({5, 3}, rng);
  EXPECT_LT(max_abs_diff(batch_norm_1d(x, p, false), x), 1e-6);
  EXPECT_EQ(p.running_mean, std::vector<double>(3, 0.0));
}

TEST(BatchNorm, TwoRowBatch) {
  NormParams p = NormParams::init(NormKind::bn, 1, 0.0);
  const Tensor y = batch_norm_1d(Tensor({2, 1}, {0.0, 2.0}), p, true);
  EXPECT_DOUBLE_EQ(y[0], -1.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
  // Running estimates move by momentum toward mean 1 and unbiased variance 2.
  EXPECT_DOUBLE_EQ(p.running_mean[0], 0.1);
  EXPECT_DOUBLE_EQ(p.running_var[0], 0.9 + 0.1 * 2.0);
}

TEST(BatchNorm, DegenerateBatchThrows) {
  NormParams p = NormParams::init(NormKind::bn, 2);
  try {
    batch_norm_1d(Tensor::zeros({1, 2}), p, true);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "degenerate batch");
  }
  EXPECT_NO_THROW(batch_norm_1d(Tensor::zeros({1, 2}), p, false));
}

TEST(GradCheck, AllNormsAwayFromZero) {
  Rng rng(44);
  for (auto kind : {NormKind::ln, NormKind::rmsn, NormKind::adarmsn}) {
    const std::size_t d = 8;
    NormParams base = NormParams::init(kind, d);
    const Tensor x = random_tensor({3, d}, rng);
    const Tensor w = random_tensor({3, d}, rng);
    const Tensor a = random_tensor({d}, rng);
    const Tensor b = random_tensor({d}, rng);
    const auto f = [&](const std::vector<Tensor>& in) {
      NormParams p = base;
      if (kind == NormKind::adarmsn) {
        p.alpha = in[1];
        p.beta = in[2];
      } else {
        p.gamma = in[1];
        if (kind == NormKind::ln) p.beta = in[2];
      }
      return ops::sum_all(normalize(in[0], p) * w);
    };
    EXPECT_LT(grad_check(f, {x, a, b}).max_rel_error, 1e-5) << to_string(kind);
  }
  NormParams bn = NormParams::init(NormKind::bn, 4);
  const Tensor x = random_tensor({6, 4}, rng);
  const Tensor w = random_tensor({6, 4}, rng);
  const auto f = [&](const std::vector<Tensor>& in) {
    NormParams p = bn;
    p.gamma = in[1];
    p.beta = in[2];
    return ops::sum_all(batch_norm_1d(in[0], p, true) * w);
  };
  EXPECT_LT(grad_check(f, {x, random_tensor({4}, rng), random_tensor({4}, rng)}).max_rel_error,
            1e-5);
}

TEST(GradCheck, AdaRmsnSumInR8) {
  Rng rng(45);
  const NormParams p = NormParams::init(NormKind::adarmsn, 8);
  const auto f = [&](const Tensor& x) { return ops::sum_all(ada_rmsn(x, p)); };
  EXPECT_LT(grad_check(f, random_tensor({8}, rng)), 1e-5);
}

}  // namespace
}  // namespace ppgt
