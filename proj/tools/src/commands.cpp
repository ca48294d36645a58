#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include <nlohmann/json.hpp>

#include "ppgt/case_study.hpp"
#include "ppgt/checks.hpp"
#include "ppgt/gradcheck.hpp"
#include "ppgt/graph_io.hpp"
#include "ppgt/harness.hpp"
#include "ppgt/ops.hpp"
#include "ppgt/pair_bank.hpp"
#include "ppgt/positional_encoding.hpp"
#include "ppgt/relpos_io.hpp"

namespace ppgt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path prepare_out(const RunConfig& config) {
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const json& seeds, const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
  json m = {{"command", command},
            {"version", "0.1.0"},
            {"config", json::parse(run_config_json(config))},
            {"seeds", seeds},
            {"outputs", outputs}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream os(dir / (command + "_manifest.json"));
  if (!os) throw Error("cannot write manifest in " + dir.string());
  os << m.dump(2) << '\n';
}

json seed_range(std::uint64_t first, std::size_t count) {
  json a = json::array();
  for (std::size_t i = 0; i < count; ++i) a.push_back(first + i);
  return a;
}

std::vector<GraphPair> selected_pairs(const RunConfig& config) {
  if (config.expressivity.pairs.empty()) return pair_bank();
  std::vector<GraphPair> out;
  for (const auto& name : config.expressivity.pairs) {
    try {
      out.push_back(find_pair(name));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

void validate_model(const ModelConfig& m) {
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

int cmd_check(const RunConfig& config, std::ostream& out) {
  const fs::path dir = prepare_out(config);
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_checks(config.seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_csv(dir / "checks.csv", check_table(results));
  write_manifest(dir, "check", config, json::array({config.seed}), {"checks.csv"});

  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(24) << r.name
        << " value=" << format_double(r.value) << " bound=" << format_double(r.tolerance);
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
    ok = ok && r.passed;
  }
  out << (ok ? "all checks passed" : "some checks FAILED") << " in " << std::fixed
      << std::setprecision(2) << seconds << " s\n";
  return ok ? kSuccess : kFailure;
}

int cmd_expressivity(const RunConfig& config, std::ostream& out) {
  validate_model(config.model);
  const auto pairs = selected_pairs(config);
  if (config.expressivity.seeds == 0) throw ConfigError("expressivity.seeds must be >= 1");
  const fs::path dir = prepare_out(config);

  SuiteOptions options;
  options.n_seeds = config.expressivity.seeds;
  options.walk_steps = config.expressivity.walk_steps;
  options.jobs = config.jobs;
  const auto reports = run_pair_suite(pairs, config.model, options);
  write_csv(dir / "pair_suite.csv", pair_suite_table(reports));

  json flagged = json::array();
  for (const auto& r : reports) {
    out << std::left << std::setw(24) << r.name << " 1-WL=" << (r.oracle.wl1 ? "yes" : "no ")
        << " GD-WL=" << (r.oracle.gdwl ? "yes" : "no ") << " median=" << format_double(r.median_distance)
        << " scale=" << format_double(r.scale) << "  " << to_string(r.verdict)
        << (r.flagged ? "  [review]" : "") << '\n';
    if (r.flagged) flagged.push_back(r.name);
  }
  write_manifest(dir, "expressivity", config, seed_range(config.seed, options.n_seeds),
                 {"pair_suite.csv"}, {{"flagged", flagged}});
  out << reports.size() << " pairs written to " << (dir / "pair_suite.csv").string() << '\n';
  return kSuccess;
}

int cmd_case_study(const RunConfig& config, std::ostream& out) {
  const auto& cs = config.case_study;
  if (cs.norms.empty()) throw ConfigError("case_study.norms is empty");
  for (NormKind k : cs.norms) {
    if (k == NormKind::ln) throw ConfigError("case_study.norms: ln is not part of the case study");
  }
  if (cs.points < 16) throw ConfigError("case_study.points must be >= 16");
  const fs::path dir = prepare_out(config);

  std::vector<CaseStudyReport> reports;
  bool ok = true;
  for (NormKind k : cs.norms) {
    CaseStudyOptions o;
    o.norm = k;
    o.n_points = cs.points;
    o.epochs = cs.epochs;
    o.seed = config.seed;
    o.hidden = cs.hidden;
    o.lr = cs.lr;
    o.weight_decay = cs.weight_decay;
    o.linear_bias = cs.linear_bias;
    try {
      reports.push_back(case_study_autoencoder(o));
      const auto& r = reports.back();
      out << std::left << std::setw(8) << to_string(k) << " mse=" << format_double(r.mse)
          << " radial_mse=" << format_double(r.radial_mse) << '\n';
    } catch (const Error& e) {
      out << std::left << std::setw(8) << to_string(k) << " FAILED: " << e.what() << '\n';
      ok = false;
    }
  }
  write_csv(dir / "case_study.csv", case_study_table(reports));
  write_manifest(dir, "case-study", config, json::array({config.seed}), {"case_study.csv"});
  return ok ? kSuccess : kFailure;
}

int cmd_sweep_spe(const RunConfig& config, std::ostream& out) {
  validate_model(config.model);
  const auto& sw = config.spe_sweep;
  GraphPair pair;
  try {
    pair = find_pair(sw.pair);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!std::is_sorted(sw.bases.begin(), sw.bases.end())) {
    throw ConfigError("sweep.spe.bases must be sorted");
  }
  if (sw.seeds == 0) throw ConfigError("sweep.spe.seeds must be >= 1");
  const fs::path dir = prepare_out(config);
  const auto rows = spe_sensitivity(pair, sw.bases, config.model, sw.seeds, config.jobs);
  write_csv(dir / "spe_sweep.csv", spe_sweep_table(pair.name, rows));
  write_manifest(dir, "sweep-spe", config, seed_range(config.seed, sw.seeds), {"spe_sweep.csv"});
  for (const auto& r : rows) {
    out << "S=" << std::left << std::setw(3) << r.bases << " channels=" << std::setw(4) << r.channels
        << " median=" << format_double(r.median_distance) << "  " << to_string(r.verdict) << '\n';
  }
  return kSuccess;
}

int cmd_sweep_batch_size(const RunConfig& config, std::ostream& out) {
  const auto& sw = config.batch_sweep;
  const auto& cs = config.case_study;
  for (NormKind k : sw.norms) {
    if (k == NormKind::ln) throw ConfigError("sweep.batch_size.norms: ln is not part of the case study");
    for (std::size_t bs : sw.batch_sizes) {
      if (k == NormKind::bn && bs < 2) {
        throw ConfigError("degenerate batch: bn needs batch size >= 2, got " + std::to_string(bs));
      }
      if (bs == 0 || bs > cs.points) {
        throw ConfigError("batch size " + std::to_string(bs) + " must be in [1, " +
                          std::to_string(cs.points) + "]");
      }
    }
  }
  if (sw.total_steps == 0) throw ConfigError("sweep.batch_size.total_steps must be >= 1");
  const fs::path dir = prepare_out(config);

  CaseStudyOptions base;
  base.n_points = cs.points;
  base.seed = config.seed;
  base.hidden = cs.hidden;
  base.lr = cs.lr;
  base.weight_decay = cs.weight_decay;
  base.linear_bias = cs.linear_bias;
  base.total_steps = sw.total_steps;
  const auto reports = batch_size_sweep(sw.norms, sw.batch_sizes, base, config.jobs);
  write_csv(dir / "bn_sweep.csv", batch_sweep_table(reports));
  write_manifest(dir, "sweep-batch-size", config, json::array({config.seed}), {"bn_sweep.csv"});
  for (const auto& r : reports) {
    out << std::left << std::setw(8) << to_string(r.norm) << " batch=" << std::setw(4) << r.batch_size
        << " mse=" << format_double(r.mse) << " radial_mse=" << format_double(r.radial_mse) << '\n';
  }
  return kSuccess;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  ModelConfig cfg = config.model;
  if (!config.model_from_file) {
    cfg.n_layers = 2;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.pe_dim = 8;
    cfg.spe_bases = 1;
  }
  validate_model(cfg);
  if (!(config.gradcheck.h > 0.0 && config.gradcheck.h <= 1e-3)) {
    throw ConfigError("gradcheck.h must be in (0, 1e-3]");
  }
  Graph g = config.gradcheck.graph.empty()
                ? Graph::build(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}})
                : read_edge_list_file(config.gradcheck.graph);
  const fs::path dir = prepare_out(config);

  ModelParams params = init_params(cfg);
  const ModelInputs inputs = prepare_inputs(g, cfg);
  std::vector<Tensor> flat;
  std::vector<std::string> names;
  for_each_param(params, [&](const std::string& name, const Tensor& t) {
    names.push_back(name);
    flat.push_back(t);
  });
  const auto r = grad_check(
      [&](const std::vector<Tensor>& in) {
        ModelParams p = params;
        std::size_t i = 0;
        for_each_param(p, [&](const std::string&, Tensor& t) { t = in[i++]; });
        const Tensor y = model_forward(inputs, cfg, p);
        return cfg.pooling == Pooling::node ? ops::sum_all(node_head(y, p.head))
                                            : ops::sum_all(graph_head(y, cfg, p));
      },
      flat, config.gradcheck.h);
  const bool ok = r.max_rel_error < config.gradcheck.tolerance;
  write_manifest(dir, "gradcheck", config, json::array({config.seed}), {},
                 {{"max_rel_error", r.max_rel_error},
                  {"worst_param", names[r.worst_input]},
                  {"worst_index", r.worst_index},
                  {"coordinates", r.coordinates}});
  out << (ok ? "PASS" : "FAIL") << "  max relative error " << format_double(r.max_rel_error)
      << " over " << r.coordinates << " coordinates (worst: " << names[r.worst_input] << "["
      << r.worst_index << "]), bound " << format_double(config.gradcheck.tolerance) << '\n';
  return ok ? kSuccess : kFailure;
}

int cmd_export_pe(const RunConfig& config, std::ostream& out) {
  validate_model(config.model);
  std::vector<std::pair<std::string, Graph>> graphs;
  if (config.export_pe.graphs.empty()) {
    for (const auto& p : pair_bank()) {
      graphs.emplace_back(p.name + ".g1", p.g1);
      graphs.emplace_back(p.name + ".g2", p.g2);
    }
  } else {
    for (const auto& path : config.export_pe.graphs) {
      try {
        graphs.emplace_back(fs::path(path).stem().string(), read_edge_list_file(path));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  const fs::path dir = prepare_out(config);
  const std::size_t k = config.model.walk_steps;
  const std::size_t s = config.model.spe_bases;
  std::vector<std::string> outputs;
  for (const auto& [name, g] : graphs) {
    const RelPosTensor raw = rrwp(g, k);
    const json prov = {{"source", name}, {"walk_steps", k}, {"nodes", g.num_nodes()}};
    save_relpos(dir / (name + ".rrwp.bin"), raw, prov.dump());
    outputs.push_back(name + ".rrwp.bin");
    if (s > 0) {
      json sp = prov;
      sp["spe_bases"] = s;
      save_relpos(dir / (name + ".spe.bin"), spe_encode(raw, s), sp.dump());
      outputs.push_back(name + ".spe.bin");
    }
    out << name << ": n=" << g.num_nodes() << " K=" << k << (s > 0 ? " (+SPE)" : "") << '\n';
  }
  write_manifest(dir, "export-pe", config, json::array({config.seed}), outputs);
  return kSuccess;
}

}  // namespace ppgt::cli
