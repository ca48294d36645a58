#include <benchmark/benchmark.h>

#include "ppgt/attention.hpp"
#include "ppgt/graph.hpp"
#include "ppgt/model.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/pair_bank.hpp"
#include "ppgt/positional_encoding.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/wl.hpp"

namespace {

using namespace ppgt;

Graph ring(std::size_t n) {
  EdgeList e;
  for (std::size_t i = 0; i < n; ++i) {
    e.emplace_back(i, (i + 1) % n);
    e.emplace_back(i, (i + 3) % n);
  }
  return build_graph(n, e);
}

Tensor random_tensor(Shape shape, Rng& rng) {
  std::vector<double> v(numel_of(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v));
}

void BM_RrwpFloat(benchmark::State& state) {
  const Graph g = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rrwp(g, 8).data.data());
}
BENCHMARK(BM_RrwpFloat)->Arg(16)->Arg(32)->Arg(64);

void BM_RrwpExact(benchmark::State& state) {
  const Graph g = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rrwp_exact(g, 8).size());
}
BENCHMARK(BM_RrwpExact)->Arg(16)->Arg(32);

void BM_Sl2Scores(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0);
  const Tensor q = random_tensor({n, 32}, rng);
  const Tensor k = random_tensor({n, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sl2_scores(q, k).data().data());
}
BENCHMARK(BM_Sl2Scores)->Arg(16)->Arg(64)->Arg(256);

void BM_Sl2UrpeAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0);
  const auto params = AttentionParams::init(AttentionKind::sl2_urpe, 32, 4, 32, rng);
  const Tensor x = random_tensor({n, 32}, rng);
  const Tensor p = random_tensor({n, n, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sl2_urpe_attention(x, p, params).data().data());
}
BENCHMARK(BM_Sl2UrpeAttention)->Arg(16)->Arg(64);

void BM_ModelForward(benchmark::State& state) {
  const Graph g = ring(static_cast<std::size_t>(state.range(0)));
  const ModelConfig config;
  const ModelParams params = init_params(config);
  const ModelInputs inputs = prepare_inputs(g, config);
  for (auto _ : state) {
    NoGrad guard;
    benchmark::DoNotOptimize(model_forward(inputs, config, params).data().data());
  }
}
BENCHMARK(BM_ModelForward)->Arg(16)->Arg(32);

void BM_ModelForwardBackward(benchmark::State& state) {
  const Graph g = ring(static_cast<std::size_t>(state.range(0)));
  const ModelConfig config;
  const ModelParams params = init_params(config);
  const ModelInputs inputs = prepare_inputs(g, config);
  for (auto _ : state) {
    Tape tape;
    const Tensor y = graph_head(model_forward(inputs, config, params), config, params);
    tape.backward(ops::sum_all(y));
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(16)->Arg(32);

void BM_Wl1(benchmark::State& state) {
  const Graph& g = find_pair("srg-16").g1;
  for (auto _ : state) benchmark::DoNotOptimize(wl1_refine(g).round);
}
BENCHMARK(BM_Wl1);

void BM_GdwlRrwp(benchmark::State& state) {
  const Graph& g = find_pair("srg-16").g1;
  const DistanceLabels labels = rrwp_labels(g, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gdwl_refine(g, labels).round);
}
BENCHMARK(BM_GdwlRrwp)->Arg(3)->Arg(8);

}  // namespace
BENCHMARK_MAIN();
