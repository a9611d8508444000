#include "modae/synthetic.hpp"

#include <cmath>
#include <stdexcept>

namespace modae {

namespace {

// Bernoulli(p) subset of [from, to) via geometric gap sampling.
template <typename Fn>
void sample_range(Rng& rng, double p, int from, int to, Fn&& emit) {
  if (p <= 0.0 || from >= to) return;
  if (p >= 1.0) {
    for (int i = from; i < to; ++i) emit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  int cur = from - 1;
  while (true) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    cur += 1 + static_cast<int>(std::floor(std::log(u) / log_q));
    if (cur >= to) break;
    emit(cur);
  }
}

}  // namespace

Graph planted_partition(const PlantedConfig& config, uint64_t seed) {
  if (config.n_nodes < 2 || config.communities < 1 || config.communities > config.n_nodes) {
    throw std::invalid_argument("planted_partition: bad sizes");
  }
  if (config.avg_degree <= 0 || config.in_out_ratio <= 0) {
    throw std::invalid_argument("planted_partition: degree parameters must be positive");
  }
  const int n = config.n_nodes;
  const int c = config.communities;

  // block boundaries in a virtual contiguous layout; sizes differ by at most
  // one. Nodes are scattered over the index range afterwards so community
  // membership carries no index correlation.
  std::vector<int> start(static_cast<size_t>(c) + 1, 0);
  const int base = n / c;
  const int rem = n % c;
  for (int i = 0; i < c; ++i) {
    start[static_cast<size_t>(i) + 1] = start[static_cast<size_t>(i)] + base + (i < rem ? 1 : 0);
  }
  std::vector<int> block_label(static_cast<size_t>(n));
  for (int i = 0; i < c; ++i) {
    for (int v = start[static_cast<size_t>(i)]; v < start[static_cast<size_t>(i) + 1]; ++v) {
      block_label[static_cast<size_t>(v)] = i;
    }
  }

  const double mean_size = static_cast<double>(n) / c;
  const double degree_in = config.avg_degree * config.in_out_ratio / (config.in_out_ratio + 1.0);
  const double degree_out = config.avg_degree / (config.in_out_ratio + 1.0);
  const double p_in = (mean_size > 1.0) ? std::min(1.0, degree_in / (mean_size - 1.0)) : 0.0;
  const double p_out =
      (n > mean_size) ? std::min(1.0, degree_out / (static_cast<double>(n) - mean_size)) : 0.0;

  Rng rng(derive_seed(seed, "planted-partition"));
  std::vector<int> node_of(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) node_of[static_cast<size_t>(i)] = i;
  rng.shuffle(node_of);  // virtual block position -> node id

  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(config.avg_degree * n / 2 * 1.2));
  for (int u = 0; u < n; ++u) {
    const int cu = block_label[static_cast<size_t>(u)];
    // within-community pairs with v > u
    sample_range(rng, p_in, u + 1, start[static_cast<size_t>(cu) + 1], [&](int v) {
      edges.emplace_back(node_of[static_cast<size_t>(u)], node_of[static_cast<size_t>(v)]);
    });
    // cross-community pairs against every later community
    sample_range(rng, p_out, start[static_cast<size_t>(cu) + 1], n, [&](int v) {
      edges.emplace_back(node_of[static_cast<size_t>(u)], node_of[static_cast<size_t>(v)]);
    });
  }

  Graph g = make_graph(n, edges);
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    labels[static_cast<size_t>(node_of[static_cast<size_t>(i)])] = block_label[static_cast<size_t>(i)];
  }
  g.labels = std::move(labels);
  return g;
}

}  // namespace modae
