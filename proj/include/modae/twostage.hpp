#pragma once

#include "modae/graph.hpp"
#include "modae/nn.hpp"

namespace modae {

/// Fixed-length neighbor sample for one node. Sampling is uniform without
/// replacement when deg(v) >= k; smaller neighborhoods are filled by cycling
/// the (sorted) neighbor list so that exhaustive sampling stays independent of
/// the seed; an isolated node yields k copies of itself.
struct NeighborSample {
  int center = -1;
  std::vector<int> sampled;  // exactly k entries
};

NeighborSample sample_neighbors(const Graph& g, int v, int k, Rng& rng);

/// MEAN sharing operator: arithmetic mean of the sampled neighbor rows.
Vector neighborhood_sharing(const Matrix& neighbor_rows);

/// tanh(CONCAT(self, shared) * W). W has 2 * dim(self) rows.
Vector membership_encoding(const Vector& self_row, const Vector& shared, const LayerWeights& w);

/// Sample-and-aggregate encoder trained on minibatch sub-blocks of the
/// modularity matrix. weights[l] has 2 * prev_dim rows (self half on top,
/// shared half below); layer 0 consumes the N(+F)-dimensional input rows.
struct TwoStageModel {
  std::vector<LayerWeights> weights;
  TrainingConfig config;
  int input_dim = 0;  // N + F of the training graph
};

std::pair<TwoStageModel, Matrix> train_twostage(const Graph& g, const TrainingConfig& config,
                                                std::vector<double>* loss_trace = nullptr);

/// Runs additional minibatch epochs on an existing model (the fine-tuning
/// path). Batch order and sampling streams derive from the model's seed.
void train_more(TwoStageModel& model, const Graph& g, int epochs, double learning_rate,
                std::vector<double>* loss_trace = nullptr);

/// Full-graph embedding: L rounds of sample -> share -> encode over all nodes,
/// with fresh samples per layer. The single-argument form derives its sample
/// stream from the stored config seed, so it is reproducible from a
/// checkpoint.
Matrix embed_twostage(const TwoStageModel& model, const Graph& g);
Matrix embed_twostage(const TwoStageModel& model, const Graph& g, uint64_t sample_seed);

/// Minibatch reconstruction loss: the p x p sub-block of the full F-norm loss
/// restricted to the batch rows. Exposed for the sub-block equivalence tests.
double minibatch_loss(const Graph& g, const Matrix& z_batch, const std::vector<int>& batch);

/// Forward + backward for one minibatch: returns the sub-block loss and, when
/// grads is non-null, the analytic weight gradients. Samples come from rng, so
/// a re-seeded stream reproduces the exact computation (the finite-difference
/// audit relies on this).
double twostage_batch_gradients(const TwoStageModel& model, const Graph& g,
                                const std::vector<int>& batch, Rng& rng,
                                std::vector<Matrix>* grads);

/// Projects layer-0 input rows (modularity row plus optional feature row)
/// onto a weight block without materializing B: the modularity row is the
/// adjacency row minus a degree-scaled rank-one term, so a projection costs
/// O(deg * d) after the degree direction q = sum_t k_t W_t is cached.
class InputProjector {
 public:
  explicit InputProjector(const Graph& g);

  /// Points the projector at rows [row_begin, row_begin + N + F) of a weight
  /// matrix and caches q. Must be called after every weight update; the matrix
  /// must outlive the projector.
  void set_block(const Matrix& weights, int row_begin);

  /// row(v) * block for an existing node.
  Vector project(int v) const;

  /// Structural (modularity-row) part only; the feature columns contribute
  /// nothing. Used when a stored row is paired with another node's features.
  Vector project_structural(int v) const;

  /// Contribution of an explicit feature vector through the feature rows.
  Vector project_features(const Vector& features) const;

  /// Projection for a synthetic row attached via stubs (a new node): the
  /// adjacency part comes from the stubs, the degree part from |stubs|.
  Vector project_attached(const std::vector<int>& stubs, const Vector* features) const;

 private:
  const Graph* graph_;
  const Matrix* weights_ = nullptr;
  int row0_ = 0;
  Vector degree_direction_;  // q
  double inv_two_m_;
};

}  // namespace modae
