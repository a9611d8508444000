#pragma once

#include <functional>
#include <string>
#include <vector>

#include "modae/linalg.hpp"

namespace modae {

enum class Decoder { kIdentity, kTanh };

/// One dense layer's weights plus optimizer accumulators.
struct LayerWeights {
  Matrix w;
  Matrix first_moment;
  Matrix second_moment;
  long step_count = 0;
};

struct TrainingConfig {
  std::vector<int> layer_dims = {32, 16};  // output dim per layer; last entry = d
  double learning_rate = 0.01;
  int epochs = 200;
  uint64_t seed = 1;
  int minibatch_size = 16;   // p
  int neighbor_samples = 5;  // k
  Decoder decoder = Decoder::kIdentity;

  int embedding_dim() const { return layer_dims.back(); }
  void validate() const;  // throws std::invalid_argument on bad values
};

/// Glorot-style uniform init in +-sqrt(6/(in+out)); fully determined by seed.
LayerWeights init_weights(int in_dim, int out_dim, uint64_t seed);

/// A_norm * h * w (the linear part of a graph-convolution layer).
Matrix gcn_linear(const Matrix& a_norm, const Matrix& h, const Matrix& w);

/// tanh(A_norm * h * w); every output lies strictly inside (-1, 1).
Matrix gcn_layer_forward(const Matrix& a_norm, const Matrix& h, const LayerWeights& w);

/// Squared F-norm reconstruction loss sum_ij (decode(z z^T)_ij - b_ij)^2.
double reconstruction_loss(const Matrix& z, const Matrix& b, Decoder decoder = Decoder::kIdentity);

/// Gradient of the reconstruction loss with respect to z. For the identity
/// decoder this is 4 (z z^T - b) z, using symmetry of both factors.
Matrix loss_gradient_wrt_embedding(const Matrix& z, const Matrix& b,
                                   Decoder decoder = Decoder::kIdentity);

/// Cached activations of a stacked forward pass: activations[0] is the input,
/// activations[l] the output of layer l.
struct ForwardCache {
  std::vector<Matrix> activations;
};

ForwardCache forward_all_layers(const Matrix& a_norm, const Matrix& input,
                                const std::vector<LayerWeights>& weights);

/// Per-layer weight gradients by reverse chaining through tanh and the shared
/// graph-convolution linear map. upstream is dLoss/d(final activation).
std::vector<Matrix> backprop_through_layers(const ForwardCache& cache,
                                            const std::vector<LayerWeights>& weights,
                                            const Matrix& upstream, const Matrix& a_norm);

/// Adaptive moment update (beta1 0.9, beta2 0.999, eps 1e-8) with bias
/// correction. Throws on non-finite gradient entries.
void adam_update(LayerWeights& w, const Matrix& grad, double learning_rate);

struct GradCheckReport {
  double max_rel_error = 0.0;
  long entries_checked = 0;
  bool passed = false;
};

/// Central-difference check of analytic gradients against a scalar closure of
/// the parameter list. Relative error uses max(1, |analytic|, |numeric|) as
/// the scale.
GradCheckReport gradient_check(const std::function<double(const std::vector<Matrix>&)>& loss,
                               const std::vector<Matrix>& params,
                               const std::vector<Matrix>& analytic_grads, double tolerance,
                               double step = 1e-5);

}  // namespace modae
