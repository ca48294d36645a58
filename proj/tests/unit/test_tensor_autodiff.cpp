#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ppgt/gradcheck.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/optim.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/tensor.hpp"
#include "test_util.hpp"

namespace ppgt {
namespace {

using test::max_abs_diff;
using test::random_tensor;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  const Tensor t({2, 3}, std::vector<double>(6, 1.0));
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.at({1, 2}), 1.0);
}

TEST(Tensor, CopiesShareStorage) {
  const Tensor a({2}, {1.0, 2.0});
  const Tensor b = a;
  EXPECT_TRUE(a.same_storage(b));
  EXPECT_FALSE(a.detach().same_storage(a));
}

TEST(Softmax, UniformOnEqualLogits) {
  const Tensor s = ops::softmax_rows(Tensor({3}, {0.0, 0.0, 0.0}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const Tensor s = ops::softmax_rows(Tensor({2}, {1000.0, 1000.0 + std::log(2.0)}));
  EXPECT_NEAR(s[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s[1], 2.0 / 3.0, 1e-12);
}

TEST(Softmax, MaskedEntryIsZero) {
  const Tensor s =
      ops::softmax_rows(Tensor({2}, {1.0, 2.0}), Tensor({2}, {-kInf, 0.0}));
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 1.0);
}

TEST(Softmax, EmptyRowThrows) {
  try {
    ops::softmax_rows(Tensor({1, 2}, {1.0, 2.0}), Tensor({1, 2}, {-kInf, -kInf}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty attention row");
  }
}

TEST(Softmax, RowsSumToOne) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.index(8), m = 1 + rng.index(8);
    const Tensor s = ops::softmax_rows(random_tensor({n, m}, rng, -20.0, 20.0));
    for (std::size_t r = 0; r < n; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < m; ++j) total += s[r * m + j];
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Softmax, ShiftInvarianceIsExact) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(5), m = 1 + rng.index(7);
    std::vector<double> z(n * m), shifted(n * m);
    const double c = static_cast<double>(static_cast<int>(rng.index(101)) - 50);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = std::ldexp(static_cast<double>(static_cast<int>(rng.index(4097)) - 2048), -8);
      shifted[i] = z[i] + c;
    }
    EXPECT_EQ(max_abs_diff(ops::softmax_rows(Tensor({n, m}, z)),
                           ops::softmax_rows(Tensor({n, m}, shifted))),
              0.0);
  }
}

TEST(Primitives, MatmulByIdentity) {
  const Tensor a({2, 2}, {1.0, 2.0, 3.0, 4.0});
  const Tensor eye({2, 2}, {1.0, 0.0, 0.0, 1.0});
  EXPECT_EQ(ops::matmul(a, eye).values(), a.values());
}

TEST(Primitives, NormOfThreeFour) {
  EXPECT_EQ(ops::l2norm_last(Tensor({2}, {3.0, 4.0})).item(), 5.0);
}

TEST(Primitives, SegmentSum) {
  const std::vector<std::size_t> seg{0, 0, 1};
  const Tensor out = ops::segment_sum(Tensor({3}, {1.0, 2.0, 3.0}), seg, 2);
  EXPECT_EQ(out.values(), (std::vector<double>{3.0, 3.0}));
}

TEST(Primitives, GatherRows) {
  const std::vector<std::size_t> idx{2, 0, 2};
  const Tensor out = ops::gather_rows(Tensor({3, 2}, {0, 1, 2, 3, 4, 5}), idx);
  EXPECT_EQ(out.values(), (std::vector<double>{4, 5, 0, 1, 4, 5}));
}

TEST(Primitives, TrailingBroadcast) {
  const Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b({3}, {10, 20, 30});
  EXPECT_EQ((x + b).values(), (std::vector<double>{11, 22, 33, 14, 25, 36}));
  EXPECT_EQ((x * Tensor::scalar(2.0)).values(), (std::vector<double>{2, 4, 6, 8, 10, 12}));
}

TEST(Primitives, ShapeMismatchNamesBothShapes) {
  try {
    ops::add(Tensor::zeros({2, 3}), Tensor::zeros({2}));
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[2]"), std::string::npos) << msg;
  }
  EXPECT_THROW(ops::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
}

TEST(Backward, SumOfSquares) {
  const Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tape tape;
  tape.backward(ops::sum_all(ops::square(x)));
  EXPECT_EQ(x.grad().values(), (std::vector<double>{2.0, 4.0}));
}

TEST(Backward, SoftmaxFirstEntry) {
  const Tensor x = Tensor::parameter({2}, {0.0, 0.0});
  Tape tape;
  tape.backward(ops::slice_last(ops::softmax_rows(x), 0, 1));
  EXPECT_NEAR(x.grad()[0], 0.25, 1e-15);
  EXPECT_NEAR(x.grad()[1], -0.25, 1e-15);
}

TEST(Backward, NormGradientIsUnitVector) {
  const Tensor x = Tensor::parameter({2}, {3.0, 4.0});
  Tape tape;
  tape.backward(ops::l2norm_last(x));
  EXPECT_NEAR(x.grad()[0], 0.6, 1e-15);
  EXPECT_NEAR(x.grad()[1], 0.8, 1e-15);
}

TEST(Backward, SharedSubexpressionAccumulates) {
  const Tensor x = Tensor::parameter({1}, {3.0});
  Tape tape;
  const Tensor y = x * x;
  tape.backward(ops::sum_all(y + y));
  EXPECT_EQ(x.grad()[0], 12.0);
}

TEST(Backward, NonScalarLossThrows) {
  const Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tape tape;
  EXPECT_THROW(tape.backward(ops::square(x)), Error);
}

TEST(Backward, DetachedTapeThrows) {
  const Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tensor loss;
  {
    Tape first;
    loss = ops::sum_all(x);
  }
  Tape second;
  EXPECT_THROW(second.backward(loss), Error);
  const Tensor untracked = ops::sum_all(Tensor({2}, {1.0, 2.0}));
  EXPECT_THROW(second.backward(untracked), Error);
}

TEST(Backward, NoGradSuspendsRecording) {
  const Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tape tape;
  {
    NoGrad guard;
    const Tensor y = ops::square(x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Backward, GradientsAreDeterministic) {
  Rng rng(3);
  const Tensor a = random_tensor({4, 5}, rng);
  const Tensor b = random_tensor({5, 3}, rng);
  auto run = [&] {
    const Tensor pa = a.as_parameter();
    const Tensor pb = b.as_parameter();
    Tape tape;
    tape.backward(ops::sum_all(ops::softmax_rows(ops::matmul(pa, pb))));
    return std::make_pair(pa.grad().values(), pb.grad().values());
  };
  EXPECT_EQ(run(), run());
}

TEST(GradCheck, QuadraticIsExact) {
  Rng rng(4);
  const Tensor x = random_tensor({7}, rng);
  EXPECT_LT(grad_check([](const Tensor& v) { return ops::sum_all(ops::square(v)); }, x), 1e-9);
}

TEST(GradCheck, RejectsBadStep) {
  const Tensor x({1}, {1.0});
  auto f = [](const Tensor& v) { return ops::sum_all(v); };
  EXPECT_THROW(grad_check(f, x, 0.0), Error);
  EXPECT_THROW(grad_check(f, x, 1e-2), Error);
}

TEST(GradCheck, NonFiniteValueNamesCoordinate) {
  const Tensor x({2}, {1.0, 0.0});
  try {
    grad_check([](const Tensor& v) { return ops::sum_all(ops::log(v)); }, x);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos) << e.what();
  }
}

// Every differentiable primitive, checked on random inputs.
TEST(GradCheck, EveryPrimitive) {
  Rng rng(5);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({3, 4}, rng);
  const Tensor pos = random_tensor({3, 4}, rng, 0.5, 2.0);
  const Tensor row = random_tensor({4}, rng);
  const Tensor m = random_tensor({4, 2}, rng);
  const std::vector<std::size_t> idx{2, 0, 1, 2};
  const std::vector<std::size_t> seg{1, 0, 1};
  const std::vector<unsigned char> keep{1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1};

  using Fn = std::function<Tensor(const std::vector<Tensor>&)>;
  const std::vector<std::pair<const char*, Fn>> cases = {
      {"add", [](auto& v) { return ops::sum_all(ops::square(v[0] + v[1])); }},
      {"sub", [](auto& v) { return ops::sum_all(ops::square(v[0] - v[1])); }},
      {"mul", [](auto& v) { return ops::sum_all(v[0] * v[1]); }},
      {"div", [](auto& v) { return ops::sum_all(v[0] / v[2]); }},
      {"broadcast", [](auto& v) { return ops::sum_all(ops::square(v[0] * v[3])); }},
      {"scale", [](auto& v) { return ops::sum_all(ops::square(v[0] * 3.0 + 1.0)); }},
      {"relu", [](auto& v) { return ops::sum_all(ops::relu(v[0]) * v[1]); }},
      {"sin", [](auto& v) { return ops::sum_all(ops::sin(v[0]) * v[1]); }},
      {"cos", [](auto& v) { return ops::sum_all(ops::cos(v[0]) * v[1]); }},
      {"exp", [](auto& v) { return ops::sum_all(ops::exp(v[0])); }},
      {"log", [](auto& v) { return ops::sum_all(ops::log(v[2])); }},
      {"sqrt", [](auto& v) { return ops::sum_all(ops::sqrt(v[2])); }},
      {"matmul", [](auto& v) { return ops::sum_all(ops::square(ops::matmul(v[0], v[4]))); }},
      {"transpose", [](auto& v) { return ops::sum_all(ops::transpose(v[0]) * ops::transpose(v[1])); }},
      {"reshape", [](auto& v) { return ops::sum_all(ops::square(ops::reshape(v[0], {4, 3}))); }},
      {"sum", [](auto& v) { return ops::sum_all(ops::square(ops::sum(v[0], 0))); }},
      {"mean", [](auto& v) { return ops::sum_all(ops::square(ops::mean(v[0], 1))); }},
      {"l2norm", [](auto& v) { return ops::sum_all(ops::l2norm_last(v[0])); }},
      {"expand", [](auto& v) { return ops::sum_all(ops::expand_last(v[3], 3) * ops::expand_last(v[3], 3)); }},
      {"concat", [](auto& v) { const Tensor parts[] = {v[0], v[1]}; return ops::sum_all(ops::square(ops::concat_last(parts))); }},
      {"slice", [](auto& v) { return ops::sum_all(ops::square(ops::slice_last(v[0], 1, 3))); }},
      {"gather", [&idx](auto& v) { return ops::sum_all(ops::square(ops::gather_rows(v[0], idx))); }},
      {"segment", [&seg](auto& v) { return ops::sum_all(ops::square(ops::segment_sum(v[0], seg, 2))); }},
      {"softmax", [](auto& v) { return ops::sum_all(ops::softmax_rows(v[0]) * v[1]); }},
      {"dropout", [&keep](auto& v) { return ops::sum_all(ops::square(ops::dropout(v[0], 0.25, keep))); }},
      {"safe_denominator", [](auto& v) { return ops::sum_all(v[0] / ops::safe_denominator(v[2], 0.1)); }},
  };
  const std::vector<Tensor> inputs{a, b, pos, row, m};
  for (const auto& [name, fn] : cases) {
    EXPECT_LT(grad_check(fn, inputs).max_rel_error, 1e-5) << name;
  }
}

TEST(AdamW, ZeroGradientZeroDecayIsIdentity) {
  Tensor p({3}, {1.0, -2.0, 0.5});
  OptimizerState state;
  state.weight_decay = 0.0;
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor::zeros({3})};
  for (int i = 0; i < 3; ++i) adamw_step(state, params, grads);
  EXPECT_EQ(p.values(), (std::vector<double>{1.0, -2.0, 0.5}));
  EXPECT_EQ(state.step, 3u);
}

TEST(AdamW, FirstStepHasMagnitudeLr) {
  Tensor p({2}, {1.0, 1.0});
  OptimizerState state;
  state.weight_decay = 0.0;
  state.lr = 0.01;
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor({2}, {0.3, -5.0})};
  adamw_step(state, params, grads);
  // m_hat = g and v_hat = g^2 after bias correction.
  EXPECT_NEAR(p[0], 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], 1.0 + 0.01 * 5.0 / (5.0 + 1e-8), 1e-15);
}

TEST(AdamW, DecoupledDecayOnly) {
  Tensor p({2}, {2.0, -4.0});
  OptimizerState state;
  state.weight_decay = 0.1;
  state.lr = 0.01;
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor::zeros({2})};
  adamw_step(state, params, grads);
  EXPECT_NEAR(p[0], 2.0 * (1.0 - 0.01 * 0.1), 1e-15);
  EXPECT_NEAR(p[1], -4.0 * (1.0 - 0.01 * 0.1), 1e-15);
}

TEST(AdamW, MomentShapesMatchParameters) {
  Tensor p({2, 3}, std::vector<double>(6, 1.0));
  Tensor q({4}, std::vector<double>(4, 1.0));
  OptimizerState state;
  Tensor* params[] = {&p, &q};
  const Tensor grads[] = {Tensor::full({2, 3}, 0.1), Tensor::full({4}, 0.2)};
  adamw_step(state, params, grads);
  ASSERT_EQ(state.m.size(), 2u);
  EXPECT_EQ(state.m[0].size(), 6u);
  EXPECT_EQ(state.v[1].size(), 4u);
  EXPECT_TRUE(p.requires_grad());
}

TEST(AdamW, NonFiniteGradientThrowsBeforeUpdate) {
  Tensor p({2}, {1.0, 1.0});
  OptimizerState state;
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor({2}, {0.1, std::nan("")})};
  try {
    adamw_step(state, params, grads);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "non-finite gradient");
  }
  EXPECT_EQ(p.values(), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(state.step, 0u);
}

TEST(AdamW, ReadsGradientsFromBackward) {
  Tensor p = Tensor::parameter({2}, {1.0, 2.0});
  {
    Tape tape;
    tape.backward(ops::sum_all(ops::square(p)));
  }
  OptimizerState state;
  state.weight_decay = 0.0;
  Tensor* params[] = {&p};
  adamw_step(state, params);
  EXPECT_LT(p[0], 1.0);
  EXPECT_LT(p[1], 2.0);
}

TEST(CosineLr, Endpoints) {
  EXPECT_EQ(cosine_lr(0, 10, 100, 1.0), 0.0);
  EXPECT_EQ(cosine_lr(10, 10, 100, 1.0), 1.0);
  EXPECT_NEAR(cosine_lr(55, 10, 100, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(cosine_lr(100, 10, 100, 1.0), 0.0, 1e-15);
  EXPECT_EQ(cosine_lr(500, 10, 100, 1.0), cosine_lr(100, 10, 100, 1.0));
  EXPECT_EQ(cosine_lr(0, 0, 100, 2.0), 2.0);
}

TEST(CosineLr, MonotoneAfterWarmup) {
  double prev = cosine_lr(10, 10, 200, 1.0);
  for (std::size_t s = 11; s <= 200; ++s) {
    const double lr = cosine_lr(s, 10, 200, 1.0);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Rng, SplitIsIndependentOfParentState) {
  Rng a(7);
  Rng b(7);
  b.next_u64();
  b.uniform();
  EXPECT_EQ(a.split("x").next_u64(), b.split("x").next_u64());
  EXPECT_NE(a.split("x").next_u64(), a.split("y").next_u64());
}

TEST(Rng, TruncatedNormalWithinTwoSigma) {
  Rng rng(8);
  for (int i = 0; i < 10000; ++i) EXPECT_LE(std::abs(rng.truncated_normal(0.02)), 0.04);
}

TEST(Rng, PermutationIsBijection) {
  Rng rng(9);
  auto p = rng.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(p[i], i);
}

}  // namespace
}  // namespace ppgt
