#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "ppgt/checkpoint.hpp"
#include "ppgt/gradcheck.hpp"
#include "ppgt/model.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/pair_bank.hpp"
#include "ppgt/rng.hpp"
#include "test_util.hpp"

namespace ppgt {
namespace {

using test::max_abs;
using test::max_abs_diff;
using test::random_tensor;

ModelConfig small_config() {
  ModelConfig c;
  c.n_layers = 2;
  c.dim = 8;
  c.heads = 2;
  c.pe_dim = 8;
  c.spe_bases = 1;
  return c;
}

Graph five_nodes() { return build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}}); }

void zero_residual_branches(ModelParams& params) {
  for (auto& layer : params.layers) {
    layer.attn.wo = Linear::zeros(layer.attn.wo.in(), layer.attn.wo.out());
    layer.mlp.fc2 = Linear::zeros(layer.mlp.fc2.in(), layer.mlp.fc2.out());
  }
}

Tensor stem_only(const Graph& g, const ModelConfig& config, const ModelParams& params) {
  const ModelInputs in = prepare_inputs(g, config);
  return normalize(node_stem_forward(in.node_attrs, in.diag, in.node_aux, params.node_stem),
                   params.final_norm);
}

TEST(ModelConfig, Validation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.heads = 5;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig{};
  c.head_depth = 0;
  EXPECT_THROW(c.validate(), Error);
  c.out_dim = c.dim;
  EXPECT_NO_THROW(c.validate());
  c = ModelConfig{};
  c.walk_steps = 0;
  EXPECT_THROW(init_params(c), Error);
  EXPECT_EQ(ModelConfig{}.pe_in_channels(), 3u * 7u + 3u);
}

TEST(ModelParams, InitFollowsRules) {
  const ModelConfig c;
  const ModelParams p = init_params(c);
  ASSERT_EQ(p.layers.size(), 4u);
  for (const auto& layer : p.layers) {
    for (double w : layer.mlp.fc1.weight.data()) EXPECT_LE(std::abs(w), 0.04);
    for (double b : layer.mlp.fc1.bias.data()) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(layer.norm1.alpha.values(), std::vector<double>(32, 0.0));
    EXPECT_EQ(layer.norm1.beta.values(), std::vector<double>(32, 1.0));
  }
  EXPECT_EQ(p.head.size(), 2u);
  EXPECT_EQ(p.head.back().out(), 1u);
  // The hidden stem layer is Kaiming-uniform with a = 0, so its bound is sqrt(6 / fan_in).
  const double bound = std::sqrt(6.0 / static_cast<double>(c.pe_in_channels()));
  double widest = 0.0;
  for (double w : p.pe_stem.input_mlp.fc1.weight.data()) widest = std::max(widest, std::abs(w));
  EXPECT_LE(widest, bound);
  EXPECT_GT(widest, 0.5 * bound);
}

TEST(ModelParams, NamesAreUniqueAndStable) {
  ModelParams p = init_params(ModelConfig{});
  std::vector<std::string> names;
  for_each_param(p, [&](const std::string& name, Tensor&) { names.push_back(name); });
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  EXPECT_NE(std::find(names.begin(), names.end(), "layers.0.attn.wq.weight"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "layers.3.attn.phi.bias"), names.end());
  EXPECT_EQ(parameter_list(p).size(), names.size());
}

TEST(ModelForward, SeedDeterminesOutputBitForBit) {
  const ModelConfig c;
  const Graph& g = find_pair("decalin-like").g1;
  const Tensor a = model_forward(g, c, init_params(c));
  const Tensor b = model_forward(g, c, init_params(c));
  EXPECT_EQ(a.values(), b.values());
  ModelConfig other = c;
  other.seed = 1;
  EXPECT_GT(max_abs_diff(a, model_forward(g, other, init_params(other))), 0.0);
}

TEST(ModelForward, ZeroLayersIsNormOfStem) {
  ModelConfig c = small_config();
  c.n_layers = 0;
  const ModelParams p = init_params(c);
  const Graph g = five_nodes();
  EXPECT_EQ(max_abs_diff(model_forward(g, c, p), stem_only(g, c, p)), 0.0);
}

TEST(ModelForward, ZeroedBranchesLeaveTheResidualStream) {
  for (std::size_t layers : {1, 3}) {
    ModelConfig c = small_config();
    c.n_layers = layers;
    ModelParams p = init_params(c);
    zero_residual_branches(p);
    const Graph g = five_nodes();
    EXPECT_LT(max_abs_diff(model_forward(g, c, p), stem_only(g, c, p)), 1e-15);
  }
}

TEST(ModelForward, ParamsMustMatchConfig) {
  ModelConfig c = small_config();
  const ModelParams p = init_params(c);
  c.n_layers = 3;
  EXPECT_THROW(model_forward(five_nodes(), c, p), Error);
  EXPECT_THROW(prepare_inputs(build_graph(0, {}), c), Error);
}

TEST(ModelForward, EveryAttentionAndNormKindRuns) {
  for (auto attn : {AttentionKind::sdp, AttentionKind::cosine, AttentionKind::sl2,
                    AttentionKind::sl2_urpe}) {
    for (auto norm : {NormKind::ln, NormKind::rmsn, NormKind::adarmsn, NormKind::bn}) {
      ModelConfig c = small_config();
      c.attention = attn;
      c.norm = norm;
      const Tensor y = model_forward(five_nodes(), c, init_params(c));
      for (double v : y.data()) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(ModelForward, UsesNodeAndEdgeAttributes) {
  ModelConfig c = small_config();
  c.node_attr_dim = 2;
  c.edge_attr_dim = 1;
  const ModelParams p = init_params(c);
  const Graph base = five_nodes();
  const Graph g = base.with_node_attrs(2, std::vector<double>(10, 0.5))
                      .with_edge_attrs(1, std::vector<double>(base.num_edges(), 1.0));
  const Graph h = base.with_node_attrs(2, std::vector<double>(10, -0.5))
                      .with_edge_attrs(1, std::vector<double>(base.num_edges(), 1.0));
  EXPECT_GT(max_abs_diff(model_forward(g, c, p), model_forward(h, c, p)), 0.0);
  EXPECT_THROW(prepare_inputs(base, c), ShapeError);
}

TEST(BlockForward, ZeroProjectionsAreIdentity) {
  ModelConfig c = small_config();
  ModelParams p = init_params(c);
  zero_residual_branches(p);
  Rng rng(70);
  const Tensor x = random_tensor({5, 8}, rng);
  const Tensor pe = random_tensor({5, 5, 8}, rng);
  EXPECT_EQ(block_forward(x, pe, p.layers[0]).values(), x.values());
}

TEST(BlockForward, PermutationEquivariance) {
  ModelConfig c = small_config();
  c.urpe_init = UrpeInit::kaiming;
  const ModelParams p = init_params(c);
  Rng rng(71);
  const std::size_t n = 6;
  const Tensor x = random_tensor({n, 8}, rng);
  const Tensor pe = random_tensor({n, n, 8}, rng);
  const auto perm = rng.permutation(n);
  std::vector<std::size_t> src(n);
  for (std::size_t i = 0; i < n; ++i) src[perm[i]] = i;
  std::vector<double> pp(pe.numel());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < 8; ++k) pp[(perm[i] * n + perm[j]) * 8 + k] = pe[(i * n + j) * 8 + k];
  const Tensor lhs = block_forward(ops::gather_rows(x, src), Tensor(pe.shape(), pp), p.layers[0]);
  const Tensor rhs = ops::gather_rows(block_forward(x, pe, p.layers[0]), src);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-9);
}

TEST(BlockForward, GradCheck) {
  ModelConfig c = small_config();
  c.urpe_init = UrpeInit::kaiming;
  const ModelParams p = init_params(c);
  Rng rng(72);
  const Tensor w = random_tensor({4, 8}, rng);
  const auto f = [&](const std::vector<Tensor>& in) {
    LayerParams layer = p.layers[0];
    layer.attn.wq.weight = in[2];
    layer.mlp.fc1.weight = in[3];
    layer.norm1.alpha = in[4];
    return ops::sum_all(block_forward(in[0], in[1], layer) * w);
  };
  const auto r = grad_check(f, {random_tensor({4, 8}, rng), random_tensor({4, 4, 8}, rng),
                                random_tensor({8, 8}, rng), random_tensor({8, 16}, rng),
                                random_tensor({8}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(GraphHead, SingleNodeSumEqualsMean) {
  ModelConfig c = small_config();
  const ModelParams p = init_params(c);
  const Tensor y = model_forward(build_graph(1, {}), c, p);
  c.pooling = Pooling::sum;
  const Tensor s = graph_head(y, c, p);
  c.pooling = Pooling::mean;
  EXPECT_EQ(graph_head(y, c, p).values(), s.values());
}

TEST(GraphHead, IdentityHeadReturnsPooledEmbedding) {
  ModelConfig c = small_config();
  c.head_depth = 0;
  c.out_dim = c.dim;
  const ModelParams p = init_params(c);
  const Tensor y = model_forward(five_nodes(), c, p);
  EXPECT_EQ(graph_head(y, c, p).values(), pool(y, Pooling::sum).values());
}

TEST(GraphHead, NodePoolingIsRejected) {
  ModelConfig c = small_config();
  const ModelParams p = init_params(c);
  const Tensor y = model_forward(five_nodes(), c, p);
  c.pooling = Pooling::node;
  EXPECT_THROW(graph_head(y, c, p), Error);
  EXPECT_THROW(pool(Tensor::zeros({0, 8}), Pooling::sum), Error);
}

TEST(GraphHead, PermutationInvariance) {
  ModelConfig c;
  c.urpe_init = UrpeInit::kaiming;
  const ModelParams p = init_params(c);
  Rng rng(73);
  for (const auto& pair : pair_bank()) {
    for (const Graph* g : {&pair.g1, &pair.g2}) {
      const Tensor y = model_forward(*g, c, p);
      const Tensor pooled = pool(y, c.pooling);
      const Tensor out = graph_head(y, c, p);
      for (int t = 0; t < 20; ++t) {
        const Graph h = permute_graph(*g, rng.permutation(g->num_nodes()));
        const Tensor yh = model_forward(h, c, p);
        EXPECT_LT(max_abs_diff(graph_head(yh, c, p), out) / (1.0 + max_abs(out)), 1e-6);
        EXPECT_LT(max_abs_diff(pool(yh, c.pooling), pooled) / (1.0 + max_abs(pooled)), 1e-6)
            << pair.name;
      }
    }
  }
}

TEST(NodeHead, SharedWeightsAndBias) {
  Rng rng(74);
  std::vector<Linear> head{Linear::truncated_normal(4, 3, 0.5, rng)};
  const Tensor row = random_tensor({1, 4}, rng);
  const Tensor y = ops::concat_last(std::vector<Tensor>{row, row});
  const Tensor out = node_head(ops::reshape(y, {2, 4}), head);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(out.at({0, d}), out.at({1, d}));
  head[0] = Linear::zeros(4, 3);
  head[0].bias = Tensor({3}, {1, 2, 3});
  const Tensor c = node_head(random_tensor({5, 4}, rng), head);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(c.at({i, 2}), 3.0);
}

TEST(NodeHead, GradCheck) {
  Rng rng(75);
  const Linear a = Linear::truncated_normal(4, 6, 0.5, rng);
  const Linear b = Linear::truncated_normal(6, 2, 0.5, rng);
  const auto f = [&](const std::vector<Tensor>& in) {
    const std::vector<Linear> head{{in[1], a.bias}, {in[2], b.bias}};
    return ops::sum_all(ops::square(node_head(in[0], head)));
  };
  EXPECT_LT(grad_check(f, {random_tensor({5, 4}, rng), a.weight, b.weight}).max_rel_error, 1e-5);
}

TEST(GradCheck, FullModelOnFiveNodes) {
  ModelConfig c = small_config();
  c.urpe_init = UrpeInit::kaiming;
  ModelParams params = init_params(c);
  std::vector<Tensor> inputs;
  for_each_param(params, [&](const std::string&, Tensor& t) { inputs.push_back(t); });
  const ModelInputs in = prepare_inputs(five_nodes(), c);
  const auto f = [&](const std::vector<Tensor>& values) {
    ModelParams p = params;
    std::size_t i = 0;
    for_each_param(p, [&](const std::string&, Tensor& t) { t = values[i++]; });
    return ops::sum_all(graph_head(model_forward(in, c, p), c, p));
  };
  const auto r = grad_check(f, inputs);
  EXPECT_GT(r.coordinates, 1000u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "ppgt_ckpt_test";
  std::filesystem::create_directories(dir);
  ModelConfig c = small_config();
  c.seed = 42;
  c.norm = NormKind::bn;
  c.attention = AttentionKind::sl2_urpe;
  c.pooling = Pooling::mean;
  const ModelParams p = init_params(c);
  save_checkpoint(dir / "model", c, p);
  const Checkpoint ck = load_checkpoint(dir / "model");
  EXPECT_EQ(config_to_json(ck.config), config_to_json(c));
  std::vector<std::vector<double>> a, b;
  for_each_param(p, [&](const std::string&, const Tensor& t) { a.push_back(t.values()); });
  for_each_param(ck.params, [&](const std::string&, const Tensor& t) { b.push_back(t.values()); });
  EXPECT_EQ(a, b);
  const Graph g = five_nodes();
  EXPECT_EQ(model_forward(g, c, p).values(), model_forward(g, ck.config, ck.params).values());
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, TruncatedBinaryIsRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "ppgt_ckpt_trunc";
  std::filesystem::create_directories(dir);
  const ModelConfig c = small_config();
  save_checkpoint(dir / "m", c, init_params(c));
  const auto bin = dir / "m.bin";
  std::filesystem::resize_file(bin, std::filesystem::file_size(bin) - 8);
  EXPECT_THROW(load_checkpoint(dir / "m"), Error);
  std::filesystem::remove_all(dir);
}

TEST(ConfigJson, UnknownKeyIsAnError) {
  EXPECT_THROW(config_from_json(R"({"dim": 16, "depth": 3})"), Error);
  const ModelConfig c = config_from_json(R"({"dim": 16, "heads": 2})");
  EXPECT_EQ(c.dim, 16u);
  EXPECT_EQ(c.heads, 2u);
  EXPECT_EQ(c.n_layers, ModelConfig{}.n_layers);
}

}  // namespace
}  // namespace ppgt
