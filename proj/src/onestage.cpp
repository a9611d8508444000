#include "modae/onestage.hpp"

#include <stdexcept>

#include "modae/modularity.hpp"

namespace modae {

Matrix build_input(const Matrix& b, const Graph& g) {
  if (b.rows() != g.n_nodes || b.cols() != g.n_nodes) {
    throw std::invalid_argument("build_input: B must be N x N");
  }
  if (!g.features) return b;
  if (g.features->rows() != g.n_nodes) {
    throw std::invalid_argument("build_input: feature row count mismatch");
  }
  Matrix input(g.n_nodes, g.n_nodes + g.feature_dim());
  input.leftCols(g.n_nodes) = b;
  input.rightCols(g.feature_dim()) = *g.features;
  return input;
}

std::pair<OneStageModel, Matrix> train_onestage(const Graph& g, const TrainingConfig& config,
                                                std::vector<double>* loss_trace) {
  config.validate();

  OneStageModel model;
  model.config = config;
  model.a_norm = normalized_adjacency(g);
  Matrix b = modularity_matrix(g);
  model.input = build_input(b, g);

  int in_dim = static_cast<int>(model.input.cols());
  for (size_t l = 0; l < config.layer_dims.size(); ++l) {
    model.weights.push_back(
        init_weights(in_dim, config.layer_dims[l], derive_seed(config.seed, "onestage-init", l)));
    in_dim = config.layer_dims[l];
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = onestage_epoch(model, b);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch));
    }
    if (loss_trace) loss_trace->push_back(loss);
  }
  Matrix z = embed(model);
  if (loss_trace) loss_trace->push_back(reconstruction_loss(z, b, config.decoder));
  return {std::move(model), std::move(z)};
}

double onestage_epoch(OneStageModel& model, const Matrix& b) {
  ForwardCache cache = forward_all_layers(model.a_norm, model.input, model.weights);
  const Matrix& z = cache.activations.back();
  const double loss = reconstruction_loss(z, b, model.config.decoder);
  Matrix upstream = loss_gradient_wrt_embedding(z, b, model.config.decoder);
  std::vector<Matrix> grads = backprop_through_layers(cache, model.weights, upstream, model.a_norm);
  for (size_t l = 0; l < model.weights.size(); ++l) {
    adam_update(model.weights[l], grads[l], model.config.learning_rate);
  }
  return loss;
}

Matrix embed(const OneStageModel& model) {
  return forward_all_layers(model.a_norm, model.input, model.weights).activations.back();
}

}  // namespace modae
