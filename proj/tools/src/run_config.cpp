#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ppgt/checkpoint.hpp"
#include "toml.hpp"

namespace ppgt::cli {
namespace {

void reject_unknown(const toml::table& table, const std::string& where,
                    const std::set<std::string>& known) {
  for (const auto& [key, node] : table) {
    if (!known.count(std::string(key.str()))) {
      throw ConfigError("unknown config key '" + (where.empty() ? "" : where + ".") +
                        std::string(key.str()) + "'");
    }
  }
}

template <class T>
T get(const toml::table& table, const std::string& where, const char* key, T fallback) {
  const toml::node* node = table.get(key);
  if (!node) return fallback;
  const std::string name = (where.empty() ? "" : where + ".") + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value<bool>()) return *v;
    throw ConfigError("config key '" + name + "' must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value<std::string>()) return *v;
    throw ConfigError("config key '" + name + "' must be a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (auto v = node->value<double>()) return *v;
    throw ConfigError("config key '" + name + "' must be a number");
  } else {
    const auto v = node->value<std::int64_t>();
    if (!v || *v < 0) throw ConfigError("config key '" + name + "' must be a non-negative integer");
    return static_cast<T>(*v);
  }
}

const toml::array* get_array(const toml::table& table, const std::string& where, const char* key) {
  const toml::node* node = table.get(key);
  if (!node) return nullptr;
  if (!node->is_array()) throw ConfigError("config key '" + where + "." + key + "' must be an array");
  return node->as_array();
}

std::vector<std::string> string_list(const toml::table& table, const std::string& where,
                                     const char* key, std::vector<std::string> fallback) {
  const auto* arr = get_array(table, where, key);
  if (!arr) return fallback;
  std::vector<std::string> out;
  for (const auto& v : *arr) {
    auto s = v.value<std::string>();
    if (!s) throw ConfigError("config key '" + where + "." + key + "' must hold strings");
    out.push_back(*s);
  }
  return out;
}

std::vector<std::size_t> size_list(const toml::table& table, const std::string& where,
                                   const char* key, std::vector<std::size_t> fallback) {
  const auto* arr = get_array(table, where, key);
  if (!arr) return fallback;
  std::vector<std::size_t> out;
  for (const auto& v : *arr) {
    auto i = v.value<std::int64_t>();
    if (!i || *i < 0) throw ConfigError("config key '" + where + "." + key + "' must hold non-negative integers");
    out.push_back(static_cast<std::size_t>(*i));
  }
  return out;
}

std::vector<NormKind> norm_list(const toml::table& table, const std::string& where,
                                std::vector<NormKind> fallback) {
  const auto* arr = get_array(table, where, "norms");
  if (!arr) return fallback;
  std::vector<NormKind> out;
  for (const auto& name : string_list(table, where, "norms", {})) {
    try {
      out.push_back(parse_norm_kind(name));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

const toml::table* section(const toml::table& root, const char* key) {
  const toml::node* node = root.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(std::string("config key '") + key + "' must be a table");
  return node->as_table();
}

void parse_model(const toml::table& t, ModelConfig& m) {
  const std::string w = "model";
  reject_unknown(t, w, {"n_layers", "dim", "heads", "ffn_expansion", "norm", "attention",
                        "walk_steps", "spe_bases", "pe_dim", "stem_ffn", "pooling", "head_depth",
                        "out_dim", "attn_dropout", "eps", "tau", "node_attr_dim",
                        "edge_attr_dim", "urpe_init"});
  m.n_layers = get(t, w, "n_layers", m.n_layers);
  m.dim = get(t, w, "dim", m.dim);
  m.heads = get(t, w, "heads", m.heads);
  m.ffn_expansion = get(t, w, "ffn_expansion", m.ffn_expansion);
  m.walk_steps = get(t, w, "walk_steps", m.walk_steps);
  m.spe_bases = get(t, w, "spe_bases", m.spe_bases);
  m.pe_dim = get(t, w, "pe_dim", m.pe_dim);
  m.stem_ffn = get(t, w, "stem_ffn", m.stem_ffn);
  m.head_depth = get(t, w, "head_depth", m.head_depth);
  m.out_dim = get(t, w, "out_dim", m.out_dim);
  m.attn_dropout = get(t, w, "attn_dropout", m.attn_dropout);
  m.eps = get(t, w, "eps", m.eps);
  m.tau = get(t, w, "tau", m.tau);
  m.node_attr_dim = get(t, w, "node_attr_dim", m.node_attr_dim);
  m.edge_attr_dim = get(t, w, "edge_attr_dim", m.edge_attr_dim);
  try {
    if (t.contains("norm")) m.norm = parse_norm_kind(get<std::string>(t, w, "norm", ""));
    if (t.contains("attention")) m.attention = parse_attention_kind(get<std::string>(t, w, "attention", ""));
    if (t.contains("pooling")) m.pooling = parse_pooling(get<std::string>(t, w, "pooling", ""));
    if (t.contains("urpe_init")) m.urpe_init = parse_urpe_init(get<std::string>(t, w, "urpe_init", ""));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(os.str());
  }
  RunConfig c;
  reject_unknown(root, "", {"seed", "jobs", "out", "model", "expressivity", "case_study", "sweep",
                            "gradcheck", "export_pe"});
  c.seed = get(root, "", "seed", c.seed);
  c.jobs = get(root, "", "jobs", c.jobs);
  c.out = get(root, "", "out", c.out);

  if (const auto* t = section(root, "model")) {
    parse_model(*t, c.model);
    c.model_from_file = true;
  }
  if (const auto* t = section(root, "expressivity")) {
    const std::string w = "expressivity";
    reject_unknown(*t, w, {"pairs", "seeds", "walk_steps"});
    c.expressivity.pairs = string_list(*t, w, "pairs", c.expressivity.pairs);
    c.expressivity.seeds = get(*t, w, "seeds", c.expressivity.seeds);
    c.expressivity.walk_steps = get(*t, w, "walk_steps", c.expressivity.walk_steps);
  }
  if (const auto* t = section(root, "case_study")) {
    const std::string w = "case_study";
    reject_unknown(*t, w, {"norms", "points", "epochs", "hidden", "lr", "weight_decay", "linear_bias"});
    auto& cs = c.case_study;
    cs.norms = norm_list(*t, w, cs.norms);
    cs.points = get(*t, w, "points", cs.points);
    cs.epochs = get(*t, w, "epochs", cs.epochs);
    cs.hidden = get(*t, w, "hidden", cs.hidden);
    cs.lr = get(*t, w, "lr", cs.lr);
    cs.weight_decay = get(*t, w, "weight_decay", cs.weight_decay);
    cs.linear_bias = get(*t, w, "linear_bias", cs.linear_bias);
  }
  if (const auto* t = section(root, "sweep")) {
    reject_unknown(*t, "sweep", {"spe", "batch_size"});
    if (const auto* s = section(*t, "spe")) {
      const std::string w = "sweep.spe";
      reject_unknown(*s, w, {"pair", "bases", "seeds"});
      c.spe_sweep.pair = get(*s, w, "pair", c.spe_sweep.pair);
      c.spe_sweep.bases = size_list(*s, w, "bases", c.spe_sweep.bases);
      c.spe_sweep.seeds = get(*s, w, "seeds", c.spe_sweep.seeds);
    }
    if (const auto* s = section(*t, "batch_size")) {
      const std::string w = "sweep.batch_size";
      reject_unknown(*s, w, {"norms", "batch_sizes", "total_steps"});
      c.batch_sweep.norms = norm_list(*s, w, c.batch_sweep.norms);
      c.batch_sweep.batch_sizes = size_list(*s, w, "batch_sizes", c.batch_sweep.batch_sizes);
      c.batch_sweep.total_steps = get(*s, w, "total_steps", c.batch_sweep.total_steps);
    }
  }
  if (const auto* t = section(root, "gradcheck")) {
    const std::string w = "gradcheck";
    reject_unknown(*t, w, {"graph", "h", "tolerance"});
    c.gradcheck.graph = get(*t, w, "graph", c.gradcheck.graph);
    c.gradcheck.h = get(*t, w, "h", c.gradcheck.h);
    c.gradcheck.tolerance = get(*t, w, "tolerance", c.gradcheck.tolerance);
  }
  if (const auto* t = section(root, "export_pe")) {
    const std::string w = "export_pe";
    reject_unknown(*t, w, {"graphs"});
    c.export_pe.graphs = string_list(*t, w, "graphs", c.export_pe.graphs);
  }
  try {
    c.model.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return parse_run_config(os.str());
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError(std::string(what) + ": '" + text + "' is not a list of non-negative integers");
    }
    out.push_back(std::stoul(item));
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) {
    if (*o.jobs == 0) throw ConfigError("--jobs must be >= 1");
    c.jobs = *o.jobs;
  }
  if (o.out) c.out = *o.out;
  if (o.pairs) {
    c.expressivity.pairs.clear();
    std::stringstream ss(*o.pairs);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) c.expressivity.pairs.push_back(item);
    }
    if (c.expressivity.pairs.size() == 1) c.spe_sweep.pair = c.expressivity.pairs.front();
  }
  if (o.k) {
    if (*o.k == 0) throw ConfigError("--k must be >= 1");
    c.expressivity.walk_steps = *o.k;
    c.model.walk_steps = *o.k;
  }
  if (o.spe_bases) {
    const auto bases = parse_size_list(*o.spe_bases, "--spe-bases");
    c.spe_sweep.bases = bases;
    c.model.spe_bases = bases.front();
  }
  c.model.seed = c.seed;
}

std::string run_config_json(const RunConfig& c) {
  using nlohmann::json;
  auto norms = [](const std::vector<NormKind>& v) {
    json a = json::array();
    for (auto k : v) a.push_back(std::string(to_string(k)));
    return a;
  };
  const json j = {
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"out", c.out},
      {"model", json::parse(config_to_json(c.model))},
      {"expressivity",
       {{"pairs", c.expressivity.pairs},
        {"seeds", c.expressivity.seeds},
        {"walk_steps", c.expressivity.walk_steps}}},
      {"case_study",
       {{"norms", norms(c.case_study.norms)},
        {"points", c.case_study.points},
        {"epochs", c.case_study.epochs},
        {"hidden", c.case_study.hidden},
        {"lr", c.case_study.lr},
        {"weight_decay", c.case_study.weight_decay},
        {"linear_bias", c.case_study.linear_bias}}},
      {"sweep",
       {{"spe", {{"pair", c.spe_sweep.pair}, {"bases", c.spe_sweep.bases}, {"seeds", c.spe_sweep.seeds}}},
        {"batch_size",
         {{"norms", norms(c.batch_sweep.norms)},
          {"batch_sizes", c.batch_sweep.batch_sizes},
          {"total_steps", c.batch_sweep.total_steps}}}}},
      {"gradcheck",
       {{"graph", c.gradcheck.graph}, {"h", c.gradcheck.h}, {"tolerance", c.gradcheck.tolerance}}},
      {"export_pe", {{"graphs", c.export_pe.graphs}}},
  };
  return j.dump(2);
}

}  // namespace ppgt::cli
