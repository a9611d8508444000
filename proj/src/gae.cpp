#include "modae/gae.hpp"

#include <cmath>
#include <stdexcept>

#include "modae/modularity.hpp"

namespace modae {

namespace {

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix adjacency_dense(const Graph& g) {
  Matrix a = Matrix::Zero(g.n_nodes, g.n_nodes);
  for (auto [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

double positive_weight(const Graph& g) {
  const double n2 = static_cast<double>(g.n_nodes) * static_cast<double>(g.n_nodes);
  const double two_m = 2.0 * static_cast<double>(g.total_edges);
  return (n2 - two_m) / two_m;
}

}  // namespace

Matrix gae_forward(const GaeModel& model) { return gae_forward(model, model.input); }

Matrix gae_forward(const GaeModel& model, const Matrix& x) {
  if (x.cols() != model.w0.w.rows()) throw std::invalid_argument("gae: X/W0 shape mismatch");
  Matrix hidden = (model.a_norm * (x * model.w0.w)).cwiseMax(0.0);
  return model.a_norm * (hidden * model.w1.w);
}

double gae_loss_logits(const Matrix& logits, const Graph& g) {
  if (logits.rows() != g.n_nodes || logits.cols() != g.n_nodes) {
    throw std::invalid_argument("gae loss: logit matrix must be N x N");
  }
  const double w_pos = positive_weight(g);
  double loss = 0.0;
  for (int i = 0; i < g.n_nodes; ++i) {
    for (int j = 0; j < g.n_nodes; ++j) {
      if (i != j && g.has_edge(i, j)) {
        loss += w_pos * softplus(-logits(i, j));
      } else {
        loss += softplus(logits(i, j));
      }
    }
  }
  return loss;
}

double gae_loss(const Matrix& z, const Graph& g) {
  if (z.rows() != g.n_nodes) throw std::invalid_argument("gae loss: Z row count mismatch");
  return gae_loss_logits(z * z.transpose(), g);
}

Matrix gae_loss_gradient(const Matrix& z, const Graph& g) {
  if (z.rows() != g.n_nodes) throw std::invalid_argument("gae gradient: Z row count mismatch");
  const double w_pos = positive_weight(g);
  Matrix s = z * z.transpose();
  Matrix d(g.n_nodes, g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    for (int j = 0; j < g.n_nodes; ++j) {
      const double sig = sigmoid(s(i, j));
      if (i != j && g.has_edge(i, j)) {
        d(i, j) = -w_pos * (1.0 - sig);
      } else {
        d(i, j) = sig;
      }
    }
  }
  return (d + d.transpose()) * z;
}

std::pair<GaeModel, Matrix> gae_train(const Graph& g, const TrainingConfig& config,
                                      std::vector<double>* loss_trace) {
  config.validate();
  if (config.layer_dims.size() != 2) {
    throw std::invalid_argument("gae baseline uses exactly two layers");
  }
  GaeModel model;
  model.a_norm = normalized_adjacency(g);
  model.input = g.features ? *g.features : Matrix(Matrix::Identity(g.n_nodes, g.n_nodes));
  const int in_dim = static_cast<int>(model.input.cols());
  model.w0 = init_weights(in_dim, config.layer_dims[0], derive_seed(config.seed, "gae-init", 0));
  model.w1 = init_weights(config.layer_dims[0], config.layer_dims[1],
                          derive_seed(config.seed, "gae-init", 1));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Matrix pre0 = model.a_norm * (model.input * model.w0.w);
    Matrix hidden = pre0.cwiseMax(0.0);
    Matrix z = model.a_norm * (hidden * model.w1.w);
    const double loss = gae_loss(z, g);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("gae: non-finite loss at epoch " + std::to_string(epoch));
    }
    if (loss_trace) loss_trace->push_back(loss);

    Matrix dz = gae_loss_gradient(z, g);
    Matrix grad_w1 = (model.a_norm * hidden).transpose() * dz;
    Matrix dhidden = model.a_norm * (dz * model.w1.w.transpose());
    Matrix dpre0 = (dhidden.array() * (pre0.array() > 0.0).cast<double>()).matrix();
    Matrix grad_w0 = (model.a_norm * model.input).transpose() * dpre0;
    adam_update(model.w1, grad_w1, config.learning_rate);
    adam_update(model.w0, grad_w0, config.learning_rate);
  }
  Matrix z = gae_forward(model);
  if (loss_trace) loss_trace->push_back(gae_loss(z, g));
  return {std::move(model), std::move(z)};
}

}  // namespace modae
