#include "modae/modularity.hpp"

#include <cmath>
#include <stdexcept>

namespace modae {

Matrix modularity_matrix(const Graph& g) {
  if (g.total_edges < 1) throw std::invalid_argument("modularity matrix needs at least one edge");
  const double inv_2m = 1.0 / (2.0 * static_cast<double>(g.total_edges));
  Matrix b(g.n_nodes, g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    const double ki = static_cast<double>(g.degree(i));
    for (int j = 0; j < g.n_nodes; ++j) {
      b(i, j) = -ki * static_cast<double>(g.degree(j)) * inv_2m;
    }
  }
  for (auto [u, v] : g.edges) {
    b(u, v) += 1.0;
    b(v, u) += 1.0;
  }
  return b;
}

Vector modularity_row(const Graph& g, int i) {
  if (g.total_edges < 1) throw std::invalid_argument("modularity row needs at least one edge");
  const double inv_2m = 1.0 / (2.0 * static_cast<double>(g.total_edges));
  const double ki = static_cast<double>(g.degree(i));
  Vector row(g.n_nodes);
  for (int j = 0; j < g.n_nodes; ++j) row(j) = -ki * static_cast<double>(g.degree(j)) * inv_2m;
  for (int u : g.neighbors(i)) row(u) += 1.0;
  return row;
}

Vector input_row(const Graph& g, int i) {
  Vector b = modularity_row(g, i);
  if (!g.features) return b;
  Vector out(g.n_nodes + g.feature_dim());
  out.head(g.n_nodes) = b;
  out.tail(g.feature_dim()) = g.features->row(i).transpose();
  return out;
}

Matrix normalized_adjacency(const Graph& g) {
  Vector inv_sqrt(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  }
  Matrix a = Matrix::Zero(g.n_nodes, g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) a(i, i) = inv_sqrt(i) * inv_sqrt(i);
  for (auto [u, v] : g.edges) {
    const double w = inv_sqrt(u) * inv_sqrt(v);
    a(u, v) = w;
    a(v, u) = w;
  }
  return a;
}

double modularity_score(const Graph& g, const CommunityAssignment& assignment) {
  if (static_cast<int>(assignment.labels.size()) != g.n_nodes) {
    throw std::invalid_argument("assignment does not cover all nodes");
  }
  if (g.total_edges < 1) throw std::invalid_argument("modularity needs at least one edge");
  int k = assignment.k;
  for (int c : assignment.labels) {
    if (c < 0) throw std::invalid_argument("negative community id");
    k = std::max(k, c + 1);
  }
  std::vector<double> internal(static_cast<size_t>(k), 0.0);   // edges inside community
  std::vector<double> degree_sum(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < g.n_nodes; ++i) {
    degree_sum[static_cast<size_t>(assignment.labels[static_cast<size_t>(i)])] +=
        static_cast<double>(g.degree(i));
  }
  for (auto [u, v] : g.edges) {
    if (assignment.labels[static_cast<size_t>(u)] == assignment.labels[static_cast<size_t>(v)]) {
      internal[static_cast<size_t>(assignment.labels[static_cast<size_t>(u)])] += 1.0;
    }
  }
  const double m = static_cast<double>(g.total_edges);
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double frac = degree_sum[static_cast<size_t>(c)] / (2.0 * m);
    q += internal[static_cast<size_t>(c)] / m - frac * frac;
  }
  return q;
}

}  // namespace modae
