#pragma once

#include "modae/graph.hpp"

namespace modae {

/// Dense module degree matrix B with b_ij = a_ij - k_i k_j / (2M).
/// Symmetric; every row sums to zero. Requires at least one edge.
Matrix modularity_matrix(const Graph& g);

/// Row i of B without materializing the full matrix.
Vector modularity_row(const Graph& g, int i);

/// Layer-0 input row for node i: modularity row, concatenated with the node's
/// feature row when the graph has features.
Vector input_row(const Graph& g, int i);

/// Symmetrically normalized self-loop-augmented adjacency
/// D^{-1/2} (A + I) D^{-1/2}, D taken from A + I.
Matrix normalized_adjacency(const Graph& g);

/// Newman modularity Q of a partition. Aggregated per-community form,
/// algebraically identical to (1/2M) sum_ij b_ij [c_i == c_j].
double modularity_score(const Graph& g, const CommunityAssignment& assignment);

}  // namespace modae
