#include "ppgt/checks.hpp"

#include <algorithm>
#include <cmath>

#include "ppgt/attention.hpp"
#include "ppgt/gradcheck.hpp"
#include "ppgt/harness.hpp"
#include "ppgt/model.hpp"
#include "ppgt/normalization.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/pair_bank.hpp"
#include "ppgt/positional_encoding.hpp"
#include "ppgt/rng.hpp"

namespace ppgt {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel_of(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

CheckResult upper_bound(std::string name, double value, double tolerance) {
  return {std::move(name), value < tolerance, value, tolerance, ""};
}

/// softmax_j(-||q_i - k_j||^2 / (2 sqrt(D))), evaluated directly.
Tensor distance_softmax(const Tensor& q, const Tensor& k) {
  const std::size_t n = q.dim(0), m = k.dim(0), d = q.dim(1);
  std::vector<double> z(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = q[i * d + c] - k[j * d + c];
        s += diff * diff;
      }
      z[i * m + j] = -s / (2.0 * std::sqrt(static_cast<double>(d)));
    }
  return ops::softmax_rows(Tensor({n, m}, std::move(z)));
}

CheckResult sl2_distance_identity(Rng rng, const CheckHooks& hooks, std::size_t draws) {
  const auto& scorer = hooks.sl2_scores;
  const std::size_t dims[] = {2, 8, 32};
  double worst = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const std::size_t n = 1 + rng.index(16);
    const std::size_t d = dims[t % 3];
    const Tensor q = random_tensor({n, d}, rng);
    const Tensor k = random_tensor({n, d}, rng);
    worst = std::max(worst, max_abs_diff(scorer(q, k), distance_softmax(q, k)));
  }
  return upper_bound("sl2-distance-identity", worst, 1e-12);
}

CheckResult softmax_shift(Rng rng) {
  // Dyadic inputs and integer shifts keep every addition exact, so the
  // shifted softmax must match bit for bit.
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.index(6), m = 1 + rng.index(8);
    std::vector<double> z(n * m), shifted(n * m);
    const double c = static_cast<double>(static_cast<int>(rng.index(201)) - 100);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = std::ldexp(static_cast<double>(static_cast<int>(rng.index(16385)) - 8192), -10);
      shifted[i] = z[i] + c;
    }
    worst = std::max(worst, max_abs_diff(ops::softmax_rows(Tensor({n, m}, z)),
                                         ops::softmax_rows(Tensor({n, m}, shifted))));
  }
  CheckResult r{"softmax-shift", worst == 0.0, worst, 0.0, ""};
  return r;
}

CheckResult scale_invariance(NormKind kind, Rng rng, std::size_t draws) {
  double worst = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const std::size_t d = 2 + rng.index(31);
    NormParams p = NormParams::init(kind, d, 0.0);
    const Tensor x = random_tensor({d}, rng);
    const Tensor y = normalize(x, p);
    for (double c : {0.5, 2.0, 10.0}) worst = std::max(worst, max_abs_diff(normalize(x * c, p), y));
  }
  return upper_bound(std::string(to_string(kind)) + "-scale-invariance", worst, 1e-12);
}

CheckResult adarmsn_witness() {
  NormParams p = NormParams::init(NormKind::adarmsn, 2, 0.0);
  p.alpha = Tensor::full({2}, 1.0);
  p.beta = Tensor::full({2}, 1.0);
  const Tensor x({2}, {1.0, 0.5});
  const double gap = max_abs_diff(ada_rmsn(x * 2.0, p), ada_rmsn(x, p));
  return {"adarmsn-scale-witness", gap > 1e-6, gap, 1e-6, "must exceed tolerance"};
}

CheckResult adarmsn_init(Rng rng) {
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(32);
    const Tensor x = random_tensor({d}, rng);
    worst = std::max(worst, max_abs_diff(ada_rmsn(x, NormParams::init(NormKind::adarmsn, d)),
                                         rmsn(x, NormParams::init(NormKind::rmsn, d))));
  }
  return upper_bound("adarmsn-init", worst, 1e-12);
}

CheckResult adarmsn_identity(Rng rng) {
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(32);
    NormParams p = NormParams::init(NormKind::adarmsn, d);
    p.alpha = Tensor::full({d}, 1.0);
    p.beta = Tensor::zeros({d});
    const Tensor x = random_tensor({d}, rng);
    worst = std::max(worst, max_abs_diff(ada_rmsn(x, p), x));
  }
  return upper_bound("adarmsn-identity", worst, 1e-12);
}

CheckResult gradcheck_norm(NormKind kind, Rng rng) {
  const std::size_t d = 6;
  const NormParams base = NormParams::init(kind, d);
  const Tensor x = random_tensor({4, d}, rng).as_parameter();
  const Tensor g = random_tensor({d}, rng, 0.5, 1.5).as_parameter();
  const Tensor b = random_tensor({d}, rng).as_parameter();
  const Tensor w = random_tensor({4, d}, rng);
  const auto r = grad_check(
      [&](const std::vector<Tensor>& in) {
        NormParams p = base;
        switch (kind) {
          case NormKind::adarmsn: p.alpha = in[1]; p.beta = in[2]; break;
          case NormKind::rmsn: p.gamma = in[1]; break;
          default: p.gamma = in[1]; p.beta = in[2]; break;
        }
        Tensor y = kind == NormKind::bn ? batch_norm_1d(in[0], p, true) : normalize(in[0], p);
        return ops::sum_all(y * w);
      },
      {x, g, b});
  return upper_bound(std::string("gradcheck-") + std::string(to_string(kind)), r.max_rel_error, 1e-5);
}

CheckResult gradcheck_attention(Rng rng) {
  const std::size_t n = 4, dm = 8, heads = 2, pe = 5;
  AttentionParams base = AttentionParams::init(AttentionKind::sl2_urpe, dm, heads, pe, rng);
  auto randomize = [&](Tensor& t) { t = random_tensor(t.shape(), rng, -0.5, 0.5).as_parameter(); };
  for (Linear* l : {&base.wq, &base.wk, &base.wv, &base.wo, &*base.phi, &*base.theta}) {
    randomize(l->weight);
    randomize(l->bias);
  }
  const Tensor x = random_tensor({n, dm}, rng);
  const Tensor p = random_tensor({n, n, pe}, rng);
  const Tensor w = random_tensor({n, dm}, rng);
  std::vector<Tensor> inputs = {x.as_parameter(), p.as_parameter()};
  for (Linear* l : {&base.wq, &base.wk, &base.wv, &base.wo, &*base.phi, &*base.theta}) {
    inputs.push_back(l->weight);
    inputs.push_back(l->bias);
  }
  const auto r = grad_check(
      [&](const std::vector<Tensor>& in) {
        AttentionParams a = base;
        std::size_t i = 2;
        for (Linear* l : {&a.wq, &a.wk, &a.wv, &a.wo, &*a.phi, &*a.theta}) {
          l->weight = in[i++];
          l->bias = in[i++];
        }
        return ops::sum_all(sl2_urpe_attention(in[0], in[1], a) * w);
      },
      inputs);
  return upper_bound("gradcheck-sl2-urpe", r.max_rel_error, 1e-4);
}

CheckResult gradcheck_model(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.pe_dim = 8;
  cfg.spe_bases = 1;
  cfg.seed = seed;
  ModelParams params = init_params(cfg);
  const Graph g = Graph::build(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}});
  const ModelInputs inputs = prepare_inputs(g, cfg);
  std::vector<Tensor> flat;
  for_each_param(params, [&](const std::string&, const Tensor& t) { flat.push_back(t); });
  const auto r = grad_check(
      [&](const std::vector<Tensor>& in) {
        ModelParams p = params;
        std::size_t i = 0;
        for_each_param(p, [&](const std::string&, Tensor& t) { t = in[i++]; });
        return ops::sum_all(graph_head(model_forward(inputs, cfg, p), cfg, p));
      },
      flat);
  return upper_bound("gradcheck-model", r.max_rel_error, 1e-4);
}

CheckResult rrwp_exactness() {
  double worst = 0.0;
  bool row_sums = true;
  for (const auto& pair : pair_bank()) {
    for (const Graph* g : {&pair.g1, &pair.g2}) {
      const auto exact = rrwp_exact(*g, 8);
      const auto dense = rrwp(*g, 8);
      for (std::size_t c = 0; c < exact.size(); ++c)
        for (std::size_t i = 0; i < g->num_nodes(); ++i) {
          if (g->degree(i) > 0 && exact[c].row_sum(i) != 1) row_sums = false;
          for (std::size_t j = 0; j < g->num_nodes(); ++j)
            worst = std::max(worst, std::abs(exact[c](i, j).get_d() - dense.at(i, j, c)));
        }
    }
  }
  CheckResult r = upper_bound("rrwp-exact", worst, 1e-12);
  if (!row_sums) {
    r.passed = false;
    r.detail = "row sum differs from 1";
  }
  return r;
}

CheckResult bank_oracles() {
  std::size_t mismatches = 0;
  std::string detail;
  for (const auto& pair : pair_bank()) {
    const auto v = oracle_distinguish(pair, kBankReferenceWalkSteps);
    if (v.wl1 != pair.expected_1wl || v.gdwl != pair.expected_gdwl_rrwp) {
      ++mismatches;
      detail += pair.name + ' ';
    }
  }
  return {"bank-oracles", mismatches == 0, static_cast<double>(mismatches), 0.0, detail};
}

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed, const CheckHooks& hooks) {
  CheckHooks h = hooks;
  if (!h.sl2_scores) h.sl2_scores = [](const Tensor& q, const Tensor& k) { return sl2_scores(q, k); };
  const Rng root(seed);
  std::vector<CheckResult> out;
  out.push_back(sl2_distance_identity(root.split("sl2-distance"), h, 300));
  out.push_back(softmax_shift(root.split("softmax")));
  out.push_back(scale_invariance(NormKind::ln, root.split("ln-scale"), 300));
  out.push_back(scale_invariance(NormKind::rmsn, root.split("rmsn-scale"), 300));
  out.push_back(adarmsn_witness());
  out.push_back(adarmsn_init(root.split("ada-init")));
  out.push_back(adarmsn_identity(root.split("ada-identity")));
  for (NormKind k : {NormKind::ln, NormKind::rmsn, NormKind::adarmsn, NormKind::bn}) {
    out.push_back(gradcheck_norm(k, root.split("grad-" + std::string(to_string(k)))));
  }
  out.push_back(gradcheck_attention(root.split("grad-attn")));
  out.push_back(gradcheck_model(seed));
  out.push_back(rrwp_exactness());
  out.push_back(bank_oracles());
  return out;
}

CsvTable check_table(const std::vector<CheckResult>& results) {
  CsvTable t;
  t.header = {"check", "passed", "value", "tolerance"};
  for (const auto& r : results) {
    t.rows.push_back({r.name, r.passed ? "true" : "false", format_double(r.value),
                      format_double(r.tolerance)});
  }
  return t;
}

}  // namespace ppgt
