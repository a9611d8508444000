#pragma once

#include "modae/graph.hpp"
#include "modae/nn.hpp"

namespace modae {

/// Two-layer graph autoencoder baseline: Z = A_norm relu(A_norm X W0) W1 with
/// a sigmoid inner-product decoder reconstructing the adjacency matrix.
struct GaeModel {
  LayerWeights w0;
  LayerWeights w1;
  Matrix a_norm;
  Matrix input;  // X; identity for featureless graphs
};

Matrix gae_forward(const GaeModel& model);
Matrix gae_forward(const GaeModel& model, const Matrix& x);

/// Element-wise binary cross-entropy between sigmoid(Z Z^T) and A, with the
/// positive class reweighted by (N^2 - 2M) / (2M) to offset edge sparsity.
double gae_loss(const Matrix& z, const Graph& g);

/// The same loss evaluated at explicit logits (gae_loss passes Z Z^T here).
double gae_loss_logits(const Matrix& logits, const Graph& g);

/// Gradient of gae_loss with respect to z.
Matrix gae_loss_gradient(const Matrix& z, const Graph& g);

std::pair<GaeModel, Matrix> gae_train(const Graph& g, const TrainingConfig& config,
                                      std::vector<double>* loss_trace = nullptr);

}  // namespace modae
