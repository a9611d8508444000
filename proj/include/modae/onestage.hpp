#pragma once

#include "modae/graph.hpp"
#include "modae/nn.hpp"

namespace modae {

/// Full-batch graph-convolutional autoencoder over the dense modularity
/// matrix. Quadratic in N by construction; meant for desk-scale graphs.
struct OneStageModel {
  std::vector<LayerWeights> weights;
  TrainingConfig config;
  Matrix a_norm;  // N x N normalized adjacency
  Matrix input;   // N x (N+F) layer-0 input
};

/// Layer-0 input: the modularity matrix, with the feature block appended when
/// the graph has features.
Matrix build_input(const Matrix& b, const Graph& g);

/// Trains with full-batch adaptive-moment steps against the reconstruction
/// loss. Returns the model and the final embedding; appends per-epoch loss to
/// loss_trace when given.
std::pair<OneStageModel, Matrix> train_onestage(const Graph& g, const TrainingConfig& config,
                                                std::vector<double>* loss_trace = nullptr);

/// Deterministic forward pass through the stored layers.
Matrix embed(const OneStageModel& model);

/// One full-batch descent step against the given target; returns the pre-step
/// loss. train_onestage is a loop over this.
double onestage_epoch(OneStageModel& model, const Matrix& b);

}  // namespace modae
