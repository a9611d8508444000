#include "modae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace modae {

bool Graph::has_edge(int u, int v) const {
  const auto& nb = adjacency[static_cast<size_t>(u)];
  return std::binary_search(nb.begin(), nb.end(), v);
}

int Graph::label_count() const {
  if (!labels) return 0;
  int k = 0;
  for (int c : *labels) k = std::max(k, c + 1);
  return k;
}

namespace {

Graph finalize(int n, std::set<std::pair<int, int>> edge_set,
               std::vector<std::string> names,
               std::unordered_map<std::string, int> name_map) {
  Graph g;
  g.n_nodes = n;
  g.edges.assign(edge_set.begin(), edge_set.end());
  g.total_edges = static_cast<long long>(g.edges.size());
  g.adjacency.assign(static_cast<size_t>(n), {});
  for (auto [u, v] : g.edges) {
    g.adjacency[static_cast<size_t>(u)].push_back(v);
    g.adjacency[static_cast<size_t>(v)].push_back(u);
  }
  for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
  g.degrees.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) g.degrees[static_cast<size_t>(i)] = static_cast<int>(g.adjacency[static_cast<size_t>(i)].size());
  g.node_names = std::move(names);
  g.name_to_index = std::move(name_map);
  return g;
}

}  // namespace

Graph load_edge_list(const std::string& path, bool /*directed_hint*/, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);

  std::unordered_map<std::string, int> name_map;
  std::vector<std::string> names;
  std::set<std::pair<int, int>> edge_set;
  LoadStats local;

  auto intern = [&](const std::string& s) {
    auto it = name_map.find(s);
    if (it != name_map.end()) return it->second;
    int id = static_cast<int>(names.size());
    name_map.emplace(s, id);
    names.push_back(s);
    return id;
  };

  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected exactly two tokens per edge line");
    }
    int u = intern(a);
    int v = intern(b);
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!edge_set.emplace(u, v).second) ++local.duplicates_dropped;
  }
  if (names.empty()) throw std::runtime_error("empty graph: " + path);
  if (stats) *stats = local;
  const int n = static_cast<int>(names.size());
  return finalize(n, std::move(edge_set), std::move(names), std::move(name_map));
}

Graph make_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
  if (n_nodes <= 0) throw std::invalid_argument("make_graph: n_nodes must be positive");
  std::set<std::pair<int, int>> edge_set;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes) {
      throw std::invalid_argument("make_graph: edge endpoint out of range");
    }
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    edge_set.emplace(u, v);
  }
  std::vector<std::string> names(static_cast<size_t>(n_nodes));
  std::unordered_map<std::string, int> name_map;
  for (int i = 0; i < n_nodes; ++i) {
    names[static_cast<size_t>(i)] = std::to_string(i);
    name_map.emplace(names[static_cast<size_t>(i)], i);
  }
  return finalize(n_nodes, std::move(edge_set), std::move(names), std::move(name_map));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  size_t pos = 0;
  double val = 0;
  try {
    val = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": non-numeric value '" + s + "'");
  }
  if (pos != s.size()) throw std::runtime_error(where + ": non-numeric value '" + s + "'");
  return val;
}

}  // namespace

void load_features(const std::string& path, Graph& graph) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(split_fields(line));
  }
  if (static_cast<int>(rows.size()) != graph.n_nodes) {
    throw std::runtime_error("feature row count " + std::to_string(rows.size()) +
                             " does not match node count " + std::to_string(graph.n_nodes));
  }

  // Labeled variant: every first token is a known node label and each node
  // appears exactly once. Otherwise rows are taken in node-index order.
  bool labeled = true;
  {
    std::vector<bool> seen(static_cast<size_t>(graph.n_nodes), false);
    for (const auto& r : rows) {
      if (r.size() < 2) { labeled = false; break; }
      auto it = graph.name_to_index.find(r[0]);
      if (it == graph.name_to_index.end() || seen[static_cast<size_t>(it->second)]) {
        labeled = false;
        break;
      }
      seen[static_cast<size_t>(it->second)] = true;
    }
  }

  const size_t width = rows[0].size() - (labeled ? 1 : 0);
  if (width == 0) throw std::runtime_error("feature file has no feature columns");
  Matrix feats = Matrix::Zero(graph.n_nodes, static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    size_t offset = labeled ? 1 : 0;
    if (fields.size() - offset != width) {
      throw std::runtime_error("feature row " + std::to_string(r) + " has inconsistent width");
    }
    int node = labeled ? graph.name_to_index.at(fields[0]) : static_cast<int>(r);
    for (size_t c = 0; c < width; ++c) {
      feats(node, static_cast<Eigen::Index>(c)) =
          parse_number(fields[c + offset], path + " row " + std::to_string(r));
    }
  }

  // Row-wise L2 normalization; zero rows stay zero.
  for (int i = 0; i < graph.n_nodes; ++i) {
    double norm = feats.row(i).norm();
    if (norm > 0) feats.row(i) /= norm;
  }
  graph.features = std::move(feats);
}

void load_labels(const std::string& path, Graph& graph) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);

  std::vector<int> raw(static_cast<size_t>(graph.n_nodes), -1);
  std::unordered_map<std::string, int> community_ids;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string node, comm, extra;
    if (!(ls >> node >> comm) || (ls >> extra)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'node-label community-id'");
    }
    auto it = graph.name_to_index.find(node);
    if (it == graph.name_to_index.end()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown node '" + node + "'");
    }
    auto [cit, inserted] = community_ids.emplace(comm, static_cast<int>(community_ids.size()));
    raw[static_cast<size_t>(it->second)] = cit->second;
    (void)inserted;
  }
  for (int i = 0; i < graph.n_nodes; ++i) {
    if (raw[static_cast<size_t>(i)] < 0) {
      throw std::runtime_error("label file misses node '" + graph.node_names[static_cast<size_t>(i)] + "'");
    }
  }
  graph.labels = std::move(raw);
}

CommunityAssignment CommunityAssignment::from_labels(std::vector<int> labels) {
  CommunityAssignment a;
  a.labels = std::move(labels);
  for (int c : a.labels) {
    if (c < 0) throw std::invalid_argument("community ids must be non-negative");
    a.k = std::max(a.k, c + 1);
  }
  return a;
}

CommunityAssignment CommunityAssignment::single_community(int n) {
  CommunityAssignment a;
  a.labels.assign(static_cast<size_t>(n), 0);
  a.k = 1;
  return a;
}

std::vector<int> compress_labels(const std::vector<int>& raw, int* k_out) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(raw.size());
  for (int c : raw) {
    auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
    out.push_back(it->second);
    (void)inserted;
  }
  if (k_out) *k_out = static_cast<int>(remap.size());
  return out;
}

}  // namespace modae
