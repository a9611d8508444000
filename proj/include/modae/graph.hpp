#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "modae/linalg.hpp"

namespace modae {

/// Immutable undirected simple graph with contiguous node indices.
///
/// Nodes carry arbitrary text labels in the input files; they are remapped to
/// 0..n_nodes-1 in order of first appearance and the mapping is kept for
/// round-tripping outputs.
struct Graph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;   // u < v, unique, no self-loops
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
  std::vector<int> degrees;                 // k_i
  long long total_edges = 0;                // M

  std::optional<Matrix> features;           // N x F, rows L2-normalized at load
  std::optional<std::vector<int>> labels;   // ground-truth community per node

  std::vector<std::string> node_names;                  // index -> original label
  std::unordered_map<std::string, int> name_to_index;   // original label -> index

  int degree(int v) const { return degrees[static_cast<size_t>(v)]; }
  const std::vector<int>& neighbors(int v) const { return adjacency[static_cast<size_t>(v)]; }
  bool has_edge(int u, int v) const;
  int feature_dim() const { return features ? static_cast<int>(features->cols()) : 0; }
  int label_count() const;  // number of distinct ground-truth communities (0 if none)
};

struct LoadStats {
  long long self_loops_dropped = 0;
  long long duplicates_dropped = 0;
};

/// Parses a whitespace-separated edge list ("u v" per line, '#' comments).
/// Self-loops and duplicate edges are dropped; the graph is stored undirected
/// regardless of directed_hint (the hint only marks that reciprocal pairs are
/// expected in the file).
Graph load_edge_list(const std::string& path, bool directed_hint = false,
                     LoadStats* stats = nullptr);

/// Builds a graph from explicit edges over nodes 0..n_nodes-1, applying the
/// same dedupe / self-loop rules as the file loader.
Graph make_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges);

/// Attaches node features. Two accepted layouts: plain comma-separated rows
/// (row i belongs to node i) or a labeled variant whose first token names the
/// node. Rows are L2-normalized; a zero row stays zero.
void load_features(const std::string& path, Graph& graph);

/// Attaches ground-truth communities from two-column "node-label community-id"
/// text. Ids are compressed to 0..K-1 in order of first appearance.
void load_labels(const std::string& path, Graph& graph);

/// Node -> community map plus the centroids that produced it when it came out
/// of clustering (centroids stay 0x0 otherwise).
struct CommunityAssignment {
  std::vector<int> labels;
  int k = 0;
  Matrix centroids;

  static CommunityAssignment from_labels(std::vector<int> labels);
  static CommunityAssignment single_community(int n);
};

/// Remaps arbitrary integer ids to 0..K-1 in order of first appearance.
std::vector<int> compress_labels(const std::vector<int>& raw, int* k_out = nullptr);

}  // namespace modae
