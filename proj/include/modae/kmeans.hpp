#pragma once

#include "modae/graph.hpp"

namespace modae {

struct KMeansResult {
  Matrix centroids;          // k x d
  std::vector<int> labels;   // per-row cluster id
  double inertia = 0.0;      // sum of squared distances to assigned centroid
  int iterations = 0;
  std::vector<double> inertia_trace;  // inertia after each assignment step
};

/// Lloyd's algorithm with distance-weighted seeding, deterministic restarts
/// (restart r uses seed base_seed + r) and empty-cluster repair. The best
/// result is the lowest inertia, ties broken by restart index.
KMeansResult kmeans_fit(const Matrix& z, int k, int restarts, uint64_t seed);

/// Index of the nearest centroid (Euclidean); ties go to the lowest id.
int assign_nearest(const Matrix& centroids, const Vector& z);

struct KSweepEntry {
  int k = 0;
  double q = 0.0;
  double inertia = 0.0;
};

struct KSweepResult {
  int best_k = 0;
  KMeansResult best;
  std::vector<KSweepEntry> table;
};

/// Clusters z for every k in [k_min, k_max] and keeps the k with the highest
/// modularity Q on the graph; ties go to the smaller k.
KSweepResult sweep_k(const Matrix& z, const Graph& g, int k_min, int k_max, int restarts,
                     uint64_t seed);

CommunityAssignment to_assignment(const KMeansResult& result);

}  // namespace modae
