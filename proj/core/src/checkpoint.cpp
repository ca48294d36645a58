#include "ppgt/checkpoint.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "ppgt/binary_io.hpp"

namespace ppgt {
namespace {

using nlohmann::json;

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

std::string config_to_json(const ModelConfig& c) {
  json j = {
      {"n_layers", c.n_layers},
      {"dim", c.dim},
      {"heads", c.heads},
      {"ffn_expansion", c.ffn_expansion},
      {"norm", to_string(c.norm)},
      {"attention", to_string(c.attention)},
      {"walk_steps", c.walk_steps},
      {"spe_bases", c.spe_bases},
      {"pe_dim", c.pe_dim},
      {"stem_ffn", c.stem_ffn},
      {"pooling", to_string(c.pooling)},
      {"head_depth", c.head_depth},
      {"out_dim", c.out_dim},
      {"seed", c.seed},
      {"attn_dropout", c.attn_dropout},
      {"eps", c.eps},
      {"tau", c.tau},
      {"node_attr_dim", c.node_attr_dim},
      {"edge_attr_dim", c.edge_attr_dim},
      {"urpe_init", to_string(c.urpe_init)},
  };
  return j.dump(2);
}

ModelConfig config_from_json(std::string_view text) {
  const json j = json::parse(text);
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_layers") c.n_layers = value.get<std::size_t>();
    else if (key == "dim") c.dim = value.get<std::size_t>();
    else if (key == "heads") c.heads = value.get<std::size_t>();
    else if (key == "ffn_expansion") c.ffn_expansion = value.get<std::size_t>();
    else if (key == "norm") c.norm = parse_norm_kind(value.get<std::string>());
    else if (key == "attention") c.attention = parse_attention_kind(value.get<std::string>());
    else if (key == "walk_steps") c.walk_steps = value.get<std::size_t>();
    else if (key == "spe_bases") c.spe_bases = value.get<std::size_t>();
    else if (key == "pe_dim") c.pe_dim = value.get<std::size_t>();
    else if (key == "stem_ffn") c.stem_ffn = value.get<std::size_t>();
    else if (key == "pooling") c.pooling = parse_pooling(value.get<std::string>());
    else if (key == "head_depth") c.head_depth = value.get<std::size_t>();
    else if (key == "out_dim") c.out_dim = value.get<std::size_t>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "attn_dropout") c.attn_dropout = value.get<double>();
    else if (key == "eps") c.eps = value.get<double>();
    else if (key == "tau") c.tau = value.get<double>();
    else if (key == "node_attr_dim") c.node_attr_dim = value.get<std::size_t>();
    else if (key == "edge_attr_dim") c.edge_attr_dim = value.get<std::size_t>();
    else if (key == "urpe_init") c.urpe_init = parse_urpe_init(value.get<std::string>());
    else throw Error("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& prefix, const ModelConfig& config,
                     const ModelParams& params) {
  std::ofstream bin(with_suffix(prefix, ".bin"), std::ios::binary);
  if (!bin) throw Error("cannot write " + with_suffix(prefix, ".bin").string());
  json tensors = json::array();
  std::size_t offset = 0;
  for_each_param(params, [&](const std::string& name, const Tensor& t) {
    tensors.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    write_f64_le(bin, t.data());
    offset += t.numel();
  });
  if (!bin) throw Error("short write to " + with_suffix(prefix, ".bin").string());

  const json manifest = {{"format", "ppgt-checkpoint-1"},
                         {"seed", config.seed},
                         {"config", json::parse(config_to_json(config))},
                         {"count", offset},
                         {"tensors", tensors}};
  std::ofstream meta(with_suffix(prefix, ".json"));
  if (!meta) throw Error("cannot write " + with_suffix(prefix, ".json").string());
  meta << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& prefix) {
  std::ifstream meta(with_suffix(prefix, ".json"));
  if (!meta) throw Error("cannot read " + with_suffix(prefix, ".json").string());
  const json manifest = json::parse(meta);
  Checkpoint ck;
  ck.config = config_from_json(manifest.at("config").dump());
  ck.params = init_params(ck.config);

  std::ifstream bin(with_suffix(prefix, ".bin"), std::ios::binary);
  if (!bin) throw Error("cannot read " + with_suffix(prefix, ".bin").string());
  const std::vector<double> flat = read_f64_le(bin, manifest.at("count").get<std::size_t>());

  std::map<std::string, json> by_name;
  for (const auto& entry : manifest.at("tensors")) by_name[entry.at("name").get<std::string>()] = entry;

  for_each_param(ck.params, [&](const std::string& name, Tensor& t) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("checkpoint: missing tensor '" + name + "'");
    const auto shape = it->second.at("shape").get<Shape>();
    if (shape != t.shape()) {
      throw ShapeError("checkpoint: tensor '" + name + "' has shape " + shape_str(shape) +
                       ", model expects " + shape_str(t.shape()));
    }
    const auto offset = it->second.at("offset").get<std::size_t>();
    if (offset + t.numel() > flat.size()) throw Error("checkpoint: tensor '" + name + "' truncated");
    t = Tensor::parameter(shape, std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                                                     flat.begin() + static_cast<std::ptrdiff_t>(offset + t.numel())));
    by_name.erase(it);
  });
  if (!by_name.empty()) throw Error("checkpoint: unexpected tensor '" + by_name.begin()->first + "'");
  return ck;
}

}  // namespace ppgt
