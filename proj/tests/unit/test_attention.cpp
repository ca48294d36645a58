#include <gtest/gtest.h>

#include <cmath>

#include "ppgt/attention.hpp"
#include "ppgt/gradcheck.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/rng.hpp"
#include "test_util.hpp"

namespace ppgt {
namespace {

using test::max_abs;
using test::max_abs_diff;
using test::random_tensor;

// softmax_j(-||q_i - k_j||^2 / (2 sqrt(D))) with explicit differences.
Tensor distance_softmax(const Tensor& q, const Tensor& k) {
  const std::size_t n = q.dim(0), m = k.dim(0), d = q.dim(1);
  std::vector<double> z(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += std::pow(q[i * d + c] - k[j * d + c], 2);
      z[i * m + j] = -s / (2.0 * std::sqrt(static_cast<double>(d)));
    }
  return ops::softmax_rows(Tensor({n, m}, std::move(z)));
}

Tensor identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor({n, n}, std::move(v));
}

// Neutral URPE maps: phi = 1 and theta = 0 for every pair.
void make_neutral(AttentionParams& params, std::size_t pe_dim) {
  params.phi = Linear::zeros(pe_dim, params.heads);
  params.phi->bias = Tensor::full({params.heads}, 1.0);
  params.theta = Linear::zeros(pe_dim, params.heads);
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  // Row i of x moves to row perm[i].
  std::vector<std::size_t> src(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) src[perm[i]] = i;
  return ops::gather_rows(x, src);
}

Tensor permute_pairs(const Tensor& p, const std::vector<std::size_t>& perm) {
  const std::size_t n = p.dim(0), c = p.dim(2);
  std::vector<double> out(p.numel());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < c; ++k)
        out[(perm[i] * n + perm[j]) * c + k] = p[(i * n + j) * c + k];
  return Tensor(p.shape(), std::move(out));
}

TEST(Sdp, ZeroInputsGiveUniformRows) {
  const Tensor s = sdp_scores(Tensor::zeros({3, 4}), Tensor::zeros({3, 4}));
  for (double v : s.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Sdp, SingleKeyGetsAllWeight) {
  Rng rng(50);
  const Tensor s = sdp_scores(random_tensor({4, 3}, rng), random_tensor({1, 3}, rng));
  for (double v : s.data()) EXPECT_EQ(v, 1.0);
}

TEST(Sdp, PrefersLargeMagnitudeKey) {
  const Tensor s = sdp_scores(Tensor({1, 2}, {1, 0}), Tensor({2, 2}, {1, 0, 2, 0}));
  EXPECT_GT(s[1], s[0]);
}

TEST(Sdp, QueryScaleKeepsRowArgmax) {
  Rng rng(51);
  for (int t = 0; t < 100; ++t) {
    const Tensor q = random_tensor({4, 8}, rng);
    const Tensor k = random_tensor({6, 8}, rng);
    const Tensor base = sdp_scores(q, k);
    for (double c : {0.1, 3.0, 50.0}) {
      const Tensor scaled = sdp_scores(q * c, k);
      for (std::size_t i = 0; i < 4; ++i) {
        const auto row = [&](const Tensor& s) {
          const auto b = s.data().begin() + static_cast<std::ptrdiff_t>(i * 6);
          return std::max_element(b, b + 6) - b;
        };
        EXPECT_EQ(row(scaled), row(base));
      }
    }
  }
}

TEST(Sl2, DistanceIdentity) {
  Rng rng(52);
  const std::size_t dims[] = {2, 8, 32};
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.index(16), d = dims[t % 3];
    const Tensor q = random_tensor({n, d}, rng);
    const Tensor k = random_tensor({n, d}, rng);
    worst = std::max(worst, max_abs_diff(sl2_scores(q, k), distance_softmax(q, k)));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Sl2, LogitsAreSdpPlusKeyBias) {
  Rng rng(53);
  const Tensor q = random_tensor({3, 4}, rng);
  const Tensor k = random_tensor({5, 4}, rng);
  const Tensor diff = sl2_logits(q, k) - sdp_logits(q, k);
  for (std::size_t j = 0; j < 5; ++j) {
    double kk = 0.0;
    for (std::size_t c = 0; c < 4; ++c) kk += k[j * 4 + c] * k[j * 4 + c];
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(diff[i * 5 + j], -kk / 4.0, 1e-15);
  }
}

TEST(Sl2, PrefersNearestKey) {
  const Tensor s = sl2_scores(Tensor({1, 2}, {1, 0}), Tensor({2, 2}, {1, 0, 2, 0}));
  EXPECT_GT(s[0], s[1]);
}

TEST(Sl2, EqualKeysGiveUniformRows) {
  const Tensor k({3, 2}, {0.5, -1, 0.5, -1, 0.5, -1});
  const Tensor s = sl2_scores(Tensor({2, 2}, {3, 1, -2, 0}), k);
  for (double v : s.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Sl2, DimensionMismatchThrows) {
  EXPECT_THROW(sl2_scores(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), ShapeError);
}

TEST(Cosine, KeyScaleDoesNotMatter) {
  const Tensor q({1, 2}, {0.3, 0.7});
  const Tensor s = cosine_scores(q, Tensor({2, 2}, {1, 2, 10, 20}), 1.0);
  EXPECT_NEAR(s[0], s[1], 1e-15);
}

TEST(Cosine, OrthogonalKeysGiveUniformRow) {
  const Tensor s = cosine_scores(Tensor({1, 2}, {0, 1}), Tensor({2, 2}, {1, 0, -1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
}

TEST(Cosine, SmallTemperatureSharpens) {
  const Tensor q({1, 2}, {1, 0});
  const Tensor k({3, 2}, {1, 0.1, 0, 1, 1, 1});
  const Tensor s = cosine_scores(q, k, 1e-3);
  EXPECT_GT(s[0], 1.0 - 1e-12);
}

TEST(Cosine, ZeroRowThrows) {
  EXPECT_THROW(cosine_scores(Tensor({1, 2}, {0, 0}), Tensor({1, 2}, {1, 0}), 1.0), Error);
  EXPECT_THROW(cosine_scores(Tensor({1, 2}, {1, 0}), Tensor({1, 2}, {1, 0}), 0.0), Error);
}

TEST(AttentionParams, PhiThetaOnlyForUrpe) {
  Rng rng(54);
  for (auto kind : {AttentionKind::sdp, AttentionKind::cosine, AttentionKind::sl2}) {
    const auto p = AttentionParams::init(kind, 8, 2, 4, rng);
    EXPECT_FALSE(p.phi.has_value());
    EXPECT_FALSE(p.theta.has_value());
  }
  const auto p = AttentionParams::init(AttentionKind::sl2_urpe, 8, 2, 4, rng);
  ASSERT_TRUE(p.phi && p.theta);
  EXPECT_EQ(p.phi->bias.values(), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(p.theta->bias.values(), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(p.model_dim(), 8u);
  for (double w : p.wq.weight.data()) EXPECT_LE(std::abs(w), 0.04);
  for (double w : p.phi->weight.data()) EXPECT_LE(std::abs(w), 0.04);
  EXPECT_THROW(AttentionParams::init(AttentionKind::sl2, 10, 4, 4, rng), Error);
}

TEST(AttentionKind, Names) {
  EXPECT_EQ(parse_attention_kind("sl2-urpe"), AttentionKind::sl2_urpe);
  EXPECT_EQ(to_string(AttentionKind::cosine), "cosine");
  EXPECT_THROW(parse_attention_kind("linear"), Error);
  EXPECT_EQ(parse_urpe_init("kaiming"), UrpeInit::kaiming);
  EXPECT_THROW(parse_urpe_init("xavier"), Error);
}

TEST(Urpe, NeutralMapsReduceToSl2) {
  Rng rng(55);
  auto urpe = AttentionParams::init(AttentionKind::sl2_urpe, 8, 2, 3, rng);
  make_neutral(urpe, 3);
  AttentionParams plain = urpe;
  plain.kind = AttentionKind::sl2;
  plain.phi.reset();
  plain.theta.reset();
  const Tensor x = random_tensor({5, 8}, rng);
  const Tensor p = random_tensor({5, 5, 3}, rng);
  EXPECT_LT(max_abs_diff(sl2_urpe_attention(x, p, urpe), multi_head(x, std::nullopt, plain)),
            1e-15);
}

TEST(Urpe, ZeroPhiSilencesHead) {
  Rng rng(56);
  auto params = AttentionParams::init(AttentionKind::sl2_urpe, 6, 2, 3, rng);
  params.wo = Linear{identity(6), Tensor::zeros({6})};
  std::vector<double> w = params.phi->weight.values();
  for (std::size_t c = 0; c < 3; ++c) w[c * 2 + 1] = 0.0;
  params.phi->weight = Tensor({3, 2}, w);
  params.phi->bias = Tensor({2}, {1.0, 0.0});
  const Tensor out = sl2_urpe_attention(random_tensor({4, 6}, rng), random_tensor({4, 4, 3}, rng),
                                        params);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t d = 3; d < 6; ++d) EXPECT_EQ(out.at({i, d}), 0.0);
  EXPECT_GT(max_abs(out), 0.0);
}

TEST(Urpe, InnerSoftmaxRowsSumToOneWithTheta) {
  Rng rng(57);
  auto params = AttentionParams::init(AttentionKind::sl2_urpe, 4, 2, 3, rng);
  params.phi = Linear::zeros(3, 2);
  params.phi->bias = Tensor::full({2}, 1.0);
  params.theta = Linear{random_tensor({3, 2}, rng, -3.0, 3.0), random_tensor({2}, rng)};
  // Constant unit values: each output entry is then the row sum of alpha.
  params.wv = Linear{Tensor::zeros({4, 4}), Tensor::full({4}, 1.0)};
  params.wo = Linear{identity(4), Tensor::zeros({4})};
  const Tensor out = sl2_urpe_attention(random_tensor({6, 4}, rng, -3.0, 3.0),
                                        random_tensor({6, 6, 3}, rng), params);
  for (double v : out.data()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Urpe, PairMaskRestrictsToAllowedKeys) {
  Rng rng(58);
  auto params = AttentionParams::init(AttentionKind::sl2_urpe, 4, 1, 2, rng);
  params.wo = Linear{identity(4), Tensor::zeros({4})};
  const std::size_t n = 3;
  PairMask self = PairMask::full(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) self.allowed[i * n + j] = i == j ? 1 : 0;
  const Tensor x = random_tensor({n, 4}, rng);
  const Tensor p = random_tensor({n, n, 2}, rng);
  const Tensor out = sl2_urpe_attention(x, p, params, &self);
  // Only the diagonal survives: out_i = phi(p_ii) * v_i.
  const Tensor v = linear(x, params.wv);
  const Tensor phi = linear(p, *params.phi);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 4; ++d)
      EXPECT_NEAR(out.at({i, d}), phi[(i * n + i)] * v.at({i, d}), 1e-15);
  PairMask empty = PairMask::full(n);
  empty.allowed.assign(n * n, 0);
  EXPECT_THROW(sl2_urpe_attention(x, p, params, &empty), Error);
}

TEST(MultiHead, SingleHeadMatchesDirectComputation) {
  Rng rng(59);
  const auto params = AttentionParams::init(AttentionKind::sl2, 4, 1, 0, rng);
  const Tensor x = random_tensor({5, 4}, rng, -10.0, 10.0);
  const Tensor q = linear(x, params.wq), k = linear(x, params.wk), v = linear(x, params.wv);
  const Tensor ref = linear(ops::matmul(sl2_scores(q, k), v), params.wo);
  EXPECT_LT(max_abs_diff(multi_head(x, std::nullopt, params), ref), 1e-15);
}

TEST(MultiHead, ZeroOutputProjectionGivesZero) {
  Rng rng(60);
  for (auto kind : {AttentionKind::sdp, AttentionKind::cosine, AttentionKind::sl2,
                    AttentionKind::sl2_urpe}) {
    auto params = AttentionParams::init(kind, 8, 4, 3, rng);
    params.wo = Linear::zeros(8, 8);
    const Tensor out =
        multi_head(random_tensor({4, 8}, rng), random_tensor({4, 4, 3}, rng), params);
    EXPECT_EQ(max_abs(out), 0.0);
  }
}

TEST(MultiHead, PermutationEquivariance) {
  Rng rng(61);
  for (auto kind : {AttentionKind::sdp, AttentionKind::cosine, AttentionKind::sl2,
                    AttentionKind::sl2_urpe}) {
    const auto params = AttentionParams::init(kind, 8, 2, 3, rng, UrpeInit::kaiming);
    const std::size_t n = 7;
    const Tensor x = random_tensor({n, 8}, rng, -20.0, 20.0);
    const Tensor p = random_tensor({n, n, 3}, rng);
    const auto perm = rng.permutation(n);
    const Tensor lhs = multi_head(permute_rows(x, perm), permute_pairs(p, perm), params);
    const Tensor rhs = permute_rows(multi_head(x, p, params), perm);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-9) << to_string(kind);
  }
}

TEST(MultiHead, ShapeErrors) {
  Rng rng(62);
  const auto params = AttentionParams::init(AttentionKind::sl2_urpe, 8, 2, 3, rng);
  EXPECT_THROW(multi_head(Tensor::zeros({4, 6}), Tensor::zeros({4, 4, 3}), params), ShapeError);
  EXPECT_THROW(multi_head(Tensor::zeros({4, 8}), Tensor::zeros({3, 3, 3}), params), ShapeError);
  EXPECT_THROW(multi_head(Tensor::zeros({4, 8}), std::nullopt, params), Error);
  const auto sdp = AttentionParams::init(AttentionKind::sdp, 8, 2, 3, rng);
  EXPECT_THROW(sl2_urpe_attention(Tensor::zeros({4, 8}), Tensor::zeros({4, 4, 3}), sdp), Error);
}

TEST(MultiHead, DropoutOnlyWithGenerator) {
  Rng rng(63);
  auto params = AttentionParams::init(AttentionKind::sl2_urpe, 8, 2, 3, rng);
  params.dropout = 0.5;
  const Tensor x = random_tensor({6, 8}, rng);
  const Tensor p = random_tensor({6, 6, 3}, rng);
  const Tensor plain = multi_head(x, p, params);
  params.dropout = 0.0;
  EXPECT_EQ(max_abs_diff(plain, multi_head(x, p, params)), 0.0);
  params.dropout = 0.5;
  Rng drop_a(1), drop_b(1);
  const Tensor a = multi_head(x, p, params, nullptr, &drop_a);
  const Tensor b = multi_head(x, p, params, nullptr, &drop_b);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_GT(max_abs_diff(a, plain), 0.0);
}

TEST(GradCheck, Sl2UrpeOnFourNodes) {
  Rng rng(64);
  const auto params = AttentionParams::init(AttentionKind::sl2_urpe, 6, 2, 3, rng, UrpeInit::kaiming);
  const Tensor w = random_tensor({4, 6}, rng);
  const auto f = [&](const std::vector<Tensor>& in) {
    AttentionParams ps = params;
    ps.wq.weight = in[2];
    ps.wk.weight = in[3];
    ps.wv.weight = in[4];
    ps.wo.weight = in[5];
    ps.phi->weight = in[6];
    ps.theta->weight = in[7];
    ps.phi->bias = in[8];
    return ops::sum_all(sl2_urpe_attention(in[0], in[1], ps) * w);
  };
  const auto r = grad_check(
      f, {random_tensor({4, 6}, rng, -2.0, 2.0), random_tensor({4, 4, 3}, rng),
          random_tensor({6, 6}, rng), random_tensor({6, 6}, rng), random_tensor({6, 6}, rng),
          random_tensor({6, 6}, rng), random_tensor({3, 2}, rng), random_tensor({3, 2}, rng),
          random_tensor({2}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(GradCheck, EveryScoreFunction) {
  Rng rng(65);
  const Tensor w = random_tensor({3, 5}, rng);
  const auto run = [&](auto score) {
    return grad_check(
               [&](const std::vector<Tensor>& in) { return ops::sum_all(score(in[0], in[1]) * w); },
               {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng)})
        .max_rel_error;
  };
  EXPECT_LT(run([](const Tensor& q, const Tensor& k) { return sdp_scores(q, k); }), 1e-5);
  EXPECT_LT(run([](const Tensor& q, const Tensor& k) { return sl2_scores(q, k); }), 1e-5);
  EXPECT_LT(run([](const Tensor& q, const Tensor& k) { return cosine_scores(q, k, 0.5); }), 1e-5);
}

}  // namespace
}  // namespace ppgt
