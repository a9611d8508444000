#pragma once

#include "modae/graph.hpp"
#include "modae/kmeans.hpp"
#include "modae/twostage.hpp"

namespace modae {

/// A node arriving after training: attachment points into the base graph plus
/// its own optional feature vector.
struct NewNode {
  std::vector<int> stubs;             // existing-node indices, non-empty
  std::optional<Vector> raw_features;
};

/// Outcome of the alignment scan: the sampled neighbor whose own sample shares
/// the most members with the new node's sample substitutes its stored input
/// row for the missing one. Strict improvement only, so zero overlap keeps the
/// first sampled neighbor.
struct FeatureAlignment {
  int chosen_node = -1;
  int chosen_sample_index = 0;
  int overlap = 0;
  std::vector<int> sample;  // the new node's k-sample over its stubs
};

FeatureAlignment align_features(const Graph& g, const NewNode& node, int k, Rng& rng);

/// Dense aligned input row: the chosen node's modularity row, concatenated
/// with the new node's own features when the graph carries features.
Vector aligned_input_row(const Graph& g, const FeatureAlignment& alignment, const NewNode& node);

/// Scaled dot-product self-attention over a set of rows: every output row is
/// the softmax-weighted mix of all input rows. Output rows stay inside the
/// convex hull of the inputs.
Matrix peer_attention(const Matrix& rows);

/// The row-stochastic coefficient matrix behind peer_attention.
Matrix peer_attention_alpha(const Matrix& rows);

/// Softmax of dots / sqrt(width), rows normalized.
Matrix attention_alpha_from_dots(const Matrix& dots, int width);

/// Read-only view used by the inference paths: the low-layer model, the
/// fitted centroids on the base graph, and cached degree sums for sparse
/// attention dots.
class IncrementalInference {
 public:
  IncrementalInference(const TwoStageModel& model, const Graph& base,
                       CommunityAssignment communities);

  struct Result {
    int community = -1;
    Vector embedding;
  };

  /// Sample-and-aggregate inference through all of the model's layers; the
  /// new node's own modularity row is derived from its stubs.
  Result infer_plain(const NewNode& node, Rng& rng) const;

  /// Alignment plus peer-attention inference. One-layer models follow the
  /// attentive pipeline directly; two-layer models apply the attention pass
  /// before the first layer and aggregate plainly above it.
  Result infer_apam(const NewNode& node, Rng& rng) const;

  const CommunityAssignment& communities() const { return communities_; }
  const TwoStageModel& model() const { return model_; }

 private:
  double input_dot(int u, int v) const;
  void check(const NewNode& node) const;

  const TwoStageModel& model_;
  const Graph& base_;
  CommunityAssignment communities_;
  InputProjector self_proj_;  // hold the first-layer weight halves
  InputProjector nbr_proj_;
  Vector neighbor_degree_sum_;  // S_u = sum of degrees over n(u)
  double sum_sq_degrees_ = 0.0;
  double inv_two_m_ = 0.0;
};

/// Truncates a trained model to its first `layers` layers and fine-tunes the
/// copy on the base graph (fresh optimizer state, reduced learning rate).
TwoStageModel truncate_and_finetune(const TwoStageModel& trained, const Graph& g, int layers,
                                    int epochs, double learning_rate, uint64_t seed);

}  // namespace modae
