#include "ppgt/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ppgt/tensor.hpp"

namespace ppgt {
namespace {

bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

bool parse_index(const std::string& s, std::size_t& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(in, line, line_no)) throw Error("edge list: missing 'n m' header");
  std::istringstream header(line);
  std::size_t n = 0, m = 0;
  if (!(header >> n >> m)) throw Error("edge list: malformed header on line " + std::to_string(line_no));
  EdgeList edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_data_line(in, line, line_no)) {
      throw Error("edge list: expected " + std::to_string(m) + " edges, found " + std::to_string(i));
    }
    std::istringstream row(line);
    std::size_t u = 0, v = 0;
    if (!(row >> u >> v)) throw Error("edge list: malformed edge on line " + std::to_string(line_no));
    edges.emplace_back(u, v);
  }
  return Graph::build(n, edges);
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_nodes() << ' ' << g.num_edges() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

std::vector<double> read_node_attrs_csv(std::istream& in, std::size_t n, std::size_t& dim) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> attrs;
  std::vector<bool> seen(n, false);
  bool have_dim = false;
  bool first = true;
  while (next_data_line(in, line, line_no)) {
    auto fields = split_csv(line);
    std::size_t id = 0;
    if (fields.empty() || !parse_index(fields[0], id)) {
      if (first) {
        first = false;
        continue;
      }
      throw Error("node attrs: bad node id on line " + std::to_string(line_no));
    }
    first = false;
    if (!have_dim) {
      dim = fields.size() - 1;
      attrs.assign(n * dim, 0.0);
      have_dim = true;
    }
    if (fields.size() - 1 != dim) {
      throw Error("node attrs: line " + std::to_string(line_no) + " has " +
                  std::to_string(fields.size() - 1) + " values, expected " + std::to_string(dim));
    }
    if (id >= n || seen[id]) {
      throw Error("node attrs: node id " + std::to_string(id) + " out of range or repeated");
    }
    seen[id] = true;
    for (std::size_t c = 0; c < dim; ++c) {
      try {
        attrs[id * dim + c] = std::stod(fields[c + 1]);
      } catch (const std::exception&) {
        throw Error("node attrs: bad value on line " + std::to_string(line_no));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw Error("node attrs: missing row for node " + std::to_string(i));
  }
  if (!have_dim) dim = 0;
  return attrs;
}

}  // namespace ppgt
