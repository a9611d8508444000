#pragma once

#include "modae/graph.hpp"

namespace modae {

/// Normalized mutual information between two partitions of the same node set,
/// normalized by the arithmetic mean of the entropies. Symmetric, in [0, 1].
/// Both sides single-cluster counts as identical partitions (returns 1).
double nmi(const CommunityAssignment& a, const CommunityAssignment& b);

/// Best-permutation matching rate between a predicted partition and ground
/// truth, via optimal assignment on the K x K confusion matrix. Exact, so it
/// is guarded to K <= 20 per side.
double accuracy(const CommunityAssignment& predicted, const CommunityAssignment& truth);

}  // namespace modae
