#pragma once

#include "modae/graph.hpp"

namespace modae {

/// Planted-partition benchmark graph: equal-size communities, a target mean
/// degree, and a fixed ratio of expected within-community to cross-community
/// degree. Ground-truth communities land in Graph::labels.
struct PlantedConfig {
  int n_nodes = 1000;
  int communities = 10;
  double avg_degree = 10.0;
  double in_out_ratio = 4.0;
};

Graph planted_partition(const PlantedConfig& config, uint64_t seed);

}  // namespace modae
