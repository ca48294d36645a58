#include "ppgt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "ppgt/ops.hpp"
#include "ppgt/optim.hpp"

namespace ppgt {
namespace {

double l2(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Runs tasks 0..count-1 over `jobs` threads; each task writes only its own
/// slot, so the merged result does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SeedResult {
  double distance = 0.0;
  double norm_sum = 0.0;
};

}  // namespace

OracleVerdict oracle_distinguish(const GraphPair& pair, std::size_t walk_steps) {
  OracleVerdict v;
  v.wl1 = graph_fingerprint(wl1_refine(pair.g1)) != graph_fingerprint(wl1_refine(pair.g2));
  v.gdwl = graph_fingerprint(gdwl_refine(pair.g1, rrwp_labels(pair.g1, walk_steps))) !=
           graph_fingerprint(gdwl_refine(pair.g2, rrwp_labels(pair.g2, walk_steps)));
  return v;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::model_distinguishes: return "model-distinguishes";
    case Verdict::model_blind: return "model-blind";
    case Verdict::isomorphic_consistent: return "isomorphic-consistent";
  }
  return "?";
}

Tensor graph_embedding(const Graph& g, const ModelConfig& config, const ModelParams& params) {
  const Pooling pooling = config.pooling == Pooling::node ? Pooling::sum : config.pooling;
  return pool(model_forward(g, config, params), pooling);
}

PairReport model_distinguish(const GraphPair& pair, const ModelConfig& config, std::size_t n_seeds,
                             std::size_t jobs) {
  if (n_seeds == 0) throw Error("model_distinguish: n_seeds must be >= 1");
  PairReport report;
  report.name = pair.name;
  report.category = pair.category;

  std::vector<SeedResult> results(n_seeds);
  parallel_for(n_seeds, jobs, [&](std::size_t s) {
    NoGrad no_grad;
    ModelConfig cfg = config;
    cfg.seed = config.seed + s;
    const ModelParams params = init_params(cfg);
    const Tensor z1 = graph_embedding(pair.g1, cfg, params);
    const Tensor z2 = graph_embedding(pair.g2, cfg, params);
    std::vector<double> diff(z1.numel());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = z1[i] - z2[i];
    const std::size_t width = diff.size();
    results[s] = {l2(Tensor({width}, std::move(diff))), l2(z1) + l2(z2)};
  });

  double norm_total = 0.0;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    report.seeds.push_back(config.seed + s);
    report.distances.push_back(results[s].distance);
    norm_total += results[s].norm_sum;
  }
  report.scale = norm_total / static_cast<double>(2 * n_seeds);
  report.median_distance = median(report.distances);

  const double iso_tol = kIsoTolerance * (1.0 + report.scale);
  const bool all_tiny = std::all_of(report.distances.begin(), report.distances.end(),
                                    [&](double d) { return d < iso_tol; });
  if (pair.category == PairCategory::isomorphic_control && all_tiny) {
    report.verdict = Verdict::isomorphic_consistent;
  } else if (report.median_distance > kDistinguishThreshold * (1.0 + report.scale)) {
    report.verdict = Verdict::model_distinguishes;
  } else {
    report.verdict = Verdict::model_blind;
  }
  return report;
}

std::vector<PairReport> run_pair_suite(const std::vector<GraphPair>& pairs, const ModelConfig& config,
                                       const SuiteOptions& options) {
  std::vector<PairReport> reports(pairs.size());
  // Parallelism is spent over seeds inside each pair.
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    PairReport r = model_distinguish(pair, config, options.n_seeds, options.jobs);
    r.oracle = oracle_distinguish(pair, options.walk_steps);
    const bool oracle_matches_bank = options.walk_steps != kBankReferenceWalkSteps ||
                                     (r.oracle.wl1 == pair.expected_1wl &&
                                      r.oracle.gdwl == pair.expected_gdwl_rrwp);
    const bool model_separates = r.verdict == Verdict::model_distinguishes;
    r.flagged = !oracle_matches_bank || model_separates != r.oracle.gdwl;
    reports[i] = std::move(r);
  }
  return reports;
}

CsvTable pair_suite_table(const std::vector<PairReport>& reports) {
  CsvTable t;
  t.header = {"pair", "category", "wl1", "gdwl", "median_dist", "verdict"};
  for (const auto& r : reports) {
    t.rows.push_back({r.name, std::string(to_string(r.category)), r.oracle.wl1 ? "true" : "false",
                      r.oracle.gdwl ? "true" : "false", format_double(r.median_distance),
                      std::string(to_string(r.verdict))});
  }
  return t;
}

std::vector<SpeRow> spe_sensitivity(const GraphPair& pair, const std::vector<std::size_t>& bases,
                                    const ModelConfig& config, std::size_t n_seeds,
                                    std::size_t jobs) {
  if (!std::is_sorted(bases.begin(), bases.end())) {
    throw Error("spe_sensitivity: S values must be sorted");
  }
  const bool gdwl = oracle_distinguish(pair, config.walk_steps).gdwl;
  std::vector<SpeRow> rows;
  for (std::size_t s : bases) {
    ModelConfig cfg = config;
    cfg.spe_bases = s;
    const PairReport r = model_distinguish(pair, cfg, n_seeds, jobs);
    rows.push_back({s, cfg.walk_steps * (1 + 2 * s), gdwl, r.median_distance, r.scale, r.verdict});
  }
  return rows;
}

CsvTable spe_sweep_table(std::string_view pair, const std::vector<SpeRow>& rows) {
  CsvTable t;
  t.header = {"pair", "spe_bases", "channels", "gdwl", "median_dist", "verdict"};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(pair), std::to_string(r.bases), std::to_string(r.channels),
                      r.oracle_gdwl ? "true" : "false", format_double(r.median_distance),
                      std::string(to_string(r.verdict))});
  }
  return t;
}

ContrastiveResult contrastive_train(const GraphPair& pair, const ModelConfig& config,
                                    const ContrastiveOptions& options) {
  ModelParams params = init_params(config);
  const ModelInputs in1 = prepare_inputs(pair.g1, config);
  const ModelInputs in2 = prepare_inputs(pair.g2, config);
  const Pooling pooling = config.pooling == Pooling::node ? Pooling::sum : config.pooling;
  OptimizerState opt;
  ContrastiveResult result;

  auto distance = [&] {
    const Tensor z1 = pool(model_forward(in1, config, params), pooling);
    const Tensor z2 = pool(model_forward(in2, config, params), pooling);
    return ops::l2norm_last(z1 - z2);
  };
  {
    NoGrad no_grad;
    result.initial_distance = distance().item();
  }
  for (std::size_t step = 0; step < options.steps; ++step) {
    opt.lr = cosine_lr(step + 1, options.warmup, options.steps + 1, options.lr);
    auto list = parameter_list(params);
    Tape tape;
    const Tensor loss = ops::relu(ops::add_scalar(-distance(), options.margin));
    tape.backward(loss);
    result.losses.push_back(loss.item());
    adamw_step(opt, list);
  }
  NoGrad no_grad;
  result.final_distance = distance().item();
  return result;
}

}  // namespace ppgt
