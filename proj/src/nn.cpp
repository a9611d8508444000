#include "modae/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace modae {

void TrainingConfig::validate() const {
  if (layer_dims.empty()) throw std::invalid_argument("layer_dims must be non-empty");
  if (layer_dims.size() > 5) throw std::invalid_argument("at most 5 layers are supported");
  for (int d : layer_dims) {
    if (d <= 0) throw std::invalid_argument("layer dims must be positive");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (minibatch_size < 1) throw std::invalid_argument("minibatch size must be >= 1");
  if (neighbor_samples < 1) throw std::invalid_argument("neighbor sample count must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
}

LayerWeights init_weights(int in_dim, int out_dim, uint64_t seed) {
  if (in_dim <= 0 || out_dim <= 0) throw std::invalid_argument("weight dims must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Rng rng(seed);
  LayerWeights lw;
  lw.w = Matrix(in_dim, out_dim);
  for (int i = 0; i < in_dim; ++i) {
    for (int j = 0; j < out_dim; ++j) {
      lw.w(i, j) = rng.uniform(-bound, bound);
    }
  }
  lw.first_moment = Matrix::Zero(in_dim, out_dim);
  lw.second_moment = Matrix::Zero(in_dim, out_dim);
  return lw;
}

Matrix gcn_linear(const Matrix& a_norm, const Matrix& h, const Matrix& w) {
  if (h.cols() != w.rows()) throw std::invalid_argument("gcn layer: H/W shape mismatch");
  return a_norm * (h * w);
}

Matrix gcn_layer_forward(const Matrix& a_norm, const Matrix& h, const LayerWeights& w) {
  return gcn_linear(a_norm, h, w.w).array().tanh().matrix();
}

double reconstruction_loss(const Matrix& z, const Matrix& b, Decoder decoder) {
  if (z.rows() != b.rows() || b.rows() != b.cols()) {
    throw std::invalid_argument("reconstruction loss: Z rows must match B (square)");
  }
  Matrix recon = z * z.transpose();
  if (decoder == Decoder::kTanh) recon = recon.array().tanh().matrix();
  return (recon - b).squaredNorm();
}

Matrix loss_gradient_wrt_embedding(const Matrix& z, const Matrix& b, Decoder decoder) {
  if (z.rows() != b.rows() || b.rows() != b.cols()) {
    throw std::invalid_argument("loss gradient: Z rows must match B (square)");
  }
  if (decoder == Decoder::kIdentity) {
    // residual (z z^T - b) is symmetric, so d/dz of its squared norm is 4 R z
    return 4.0 * ((z * z.transpose() - b) * z);
  }
  Matrix recon = (z * z.transpose()).array().tanh().matrix();
  Matrix inner = (2.0 * (recon - b).array() * (1.0 - recon.array().square())).matrix();
  return (inner + inner.transpose()) * z;
}

ForwardCache forward_all_layers(const Matrix& a_norm, const Matrix& input,
                                const std::vector<LayerWeights>& weights) {
  ForwardCache cache;
  cache.activations.reserve(weights.size() + 1);
  cache.activations.push_back(input);
  for (const auto& lw : weights) {
    cache.activations.push_back(gcn_layer_forward(a_norm, cache.activations.back(), lw));
  }
  return cache;
}

std::vector<Matrix> backprop_through_layers(const ForwardCache& cache,
                                            const std::vector<LayerWeights>& weights,
                                            const Matrix& upstream, const Matrix& a_norm) {
  const size_t layers = weights.size();
  if (cache.activations.size() != layers + 1) {
    throw std::invalid_argument("backprop: cache does not match layer count");
  }
  if (upstream.rows() != cache.activations.back().rows() ||
      upstream.cols() != cache.activations.back().cols()) {
    throw std::invalid_argument("backprop: upstream shape mismatch");
  }
  std::vector<Matrix> grads(layers);
  Matrix g = upstream;  // dLoss/d(activation of current layer)
  for (size_t l = layers; l-- > 0;) {
    const Matrix& out = cache.activations[l + 1];
    // through tanh
    Matrix pre = (g.array() * (1.0 - out.array().square())).matrix();
    grads[l] = (a_norm * cache.activations[l]).transpose() * pre;
    if (l > 0) g = a_norm * (pre * weights[l].w.transpose());
  }
  return grads;
}

void adam_update(LayerWeights& w, const Matrix& grad, double learning_rate) {
  if (grad.rows() != w.w.rows() || grad.cols() != w.w.cols()) {
    throw std::invalid_argument("adam: gradient shape mismatch");
  }
  if (!grad.allFinite()) throw std::runtime_error("adam: non-finite gradient");
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  w.step_count += 1;
  w.first_moment = kBeta1 * w.first_moment + (1.0 - kBeta1) * grad;
  w.second_moment = (kBeta2 * w.second_moment.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(w.step_count));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(w.step_count));
  w.w -= (learning_rate * (w.first_moment.array() / c1) /
          ((w.second_moment.array() / c2).sqrt() + kEps))
             .matrix();
}

GradCheckReport gradient_check(const std::function<double(const std::vector<Matrix>&)>& loss,
                               const std::vector<Matrix>& params,
                               const std::vector<Matrix>& analytic_grads, double tolerance,
                               double step) {
  if (params.size() != analytic_grads.size()) {
    throw std::invalid_argument("gradient check: parameter/gradient count mismatch");
  }
  GradCheckReport report;
  std::vector<Matrix> probe = params;
  for (size_t p = 0; p < probe.size(); ++p) {
    for (Eigen::Index i = 0; i < probe[p].rows(); ++i) {
      for (Eigen::Index j = 0; j < probe[p].cols(); ++j) {
        const double saved = probe[p](i, j);
        probe[p](i, j) = saved + step;
        const double up = loss(probe);
        probe[p](i, j) = saved - step;
        const double down = loss(probe);
        probe[p](i, j) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double analytic = analytic_grads[p](i, j);
        const double scale = std::max({1.0, std::abs(numeric), std::abs(analytic)});
        report.max_rel_error = std::max(report.max_rel_error, std::abs(numeric - analytic) / scale);
        ++report.entries_checked;
      }
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace modae
