#include "modae/twostage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modae/modularity.hpp"

namespace modae {

NeighborSample sample_neighbors(const Graph& g, int v, int k, Rng& rng) {
  if (v < 0 || v >= g.n_nodes) throw std::invalid_argument("sample_neighbors: node out of range");
  if (k < 1) throw std::invalid_argument("sample_neighbors: k must be >= 1");
  NeighborSample s;
  s.center = v;
  s.sampled.reserve(static_cast<size_t>(k));
  const auto& nb = g.neighbors(v);
  const int deg = static_cast<int>(nb.size());
  if (deg == 0) {
    s.sampled.assign(static_cast<size_t>(k), v);
    return s;
  }
  if (deg >= k) {
    std::vector<int> idx = rng.sample_indices(deg, k);
    for (int i : idx) s.sampled.push_back(nb[static_cast<size_t>(i)]);
    return s;
  }
  // Deficient neighborhood: cycle the sorted list. Every neighbor appears
  // floor(k/deg) or ceil(k/deg) times and the multiset does not depend on the
  // seed, so exhaustive sampling commutes with MEAN sharing.
  for (int i = 0; i < k; ++i) s.sampled.push_back(nb[static_cast<size_t>(i % deg)]);
  return s;
}

Vector neighborhood_sharing(const Matrix& neighbor_rows) {
  if (neighbor_rows.rows() == 0) throw std::invalid_argument("neighborhood_sharing: empty input");
  return neighbor_rows.colwise().mean().transpose();
}

Vector membership_encoding(const Vector& self_row, const Vector& shared, const LayerWeights& w) {
  if (self_row.size() != shared.size() || 2 * self_row.size() != w.w.rows()) {
    throw std::invalid_argument("membership_encoding: shape mismatch");
  }
  const auto dim = self_row.size();
  Vector pre = w.w.topRows(dim).transpose() * self_row + w.w.bottomRows(dim).transpose() * shared;
  return pre.array().tanh().matrix();
}

InputProjector::InputProjector(const Graph& g)
    : graph_(&g), inv_two_m_(1.0 / (2.0 * static_cast<double>(std::max<long long>(g.total_edges, 1)))) {}

void InputProjector::set_block(const Matrix& weights, int row_begin) {
  const int n = graph_->n_nodes;
  const int width = n + graph_->feature_dim();
  if (row_begin < 0 || row_begin + width > weights.rows()) {
    throw std::invalid_argument("projector block does not fit the weight matrix");
  }
  weights_ = &weights;
  row0_ = row_begin;
  degree_direction_ = Vector::Zero(weights.cols());
  for (int t = 0; t < n; ++t) {
    if (graph_->degree(t) > 0) {
      degree_direction_ +=
          static_cast<double>(graph_->degree(t)) * weights.row(row0_ + t).transpose();
    }
  }
}

Vector InputProjector::project_structural(int v) const {
  Vector out = Vector::Zero(weights_->cols());
  for (int u : graph_->neighbors(v)) out += weights_->row(row0_ + u).transpose();
  out -= (static_cast<double>(graph_->degree(v)) * inv_two_m_) * degree_direction_;
  return out;
}

Vector InputProjector::project_features(const Vector& features) const {
  return weights_->middleRows(row0_ + graph_->n_nodes, graph_->feature_dim()).transpose() *
         features;
}

Vector InputProjector::project(int v) const {
  Vector out = project_structural(v);
  if (graph_->features) {
    out += project_features(graph_->features->row(v).transpose());
  }
  return out;
}

Vector InputProjector::project_attached(const std::vector<int>& stubs, const Vector* features) const {
  Vector out = Vector::Zero(weights_->cols());
  for (int u : stubs) out += weights_->row(row0_ + u).transpose();
  out -= (static_cast<double>(stubs.size()) * inv_two_m_) * degree_direction_;
  if (graph_->features) {
    if (!features) throw std::invalid_argument("new node lacks features on a featured graph");
    out += weights_->middleRows(row0_ + graph_->n_nodes, graph_->feature_dim()).transpose() *
           (*features);
  }
  return out;
}

double minibatch_loss(const Graph& g, const Matrix& z_batch, const std::vector<int>& batch) {
  if (z_batch.rows() != static_cast<Eigen::Index>(batch.size())) {
    throw std::invalid_argument("minibatch_loss: row count mismatch");
  }
  const double inv_two_m = 1.0 / (2.0 * static_cast<double>(g.total_edges));
  double loss = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    for (size_t j = 0; j < batch.size(); ++j) {
      const int u = batch[i];
      const int v = batch[j];
      double b = -static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v)) * inv_two_m;
      if (g.has_edge(u, v)) b += 1.0;
      const double r = z_batch.row(static_cast<Eigen::Index>(i))
                           .dot(z_batch.row(static_cast<Eigen::Index>(j))) -
                       b;
      loss += r * r;
    }
  }
  return loss;
}

namespace {

// Gradient accumulator for a layer-0 weight block. Scattered adjacency
// contributions land directly in the dense buffer; the rank-one degree term is
// folded in once at the end of the batch.
class InputGradAccumulator {
 public:
  InputGradAccumulator(const Graph& g, Eigen::Index out_dim)
      : graph_(&g),
        dense_(Matrix::Zero(g.n_nodes + g.feature_dim(), out_dim)),
        rank1_(Vector::Zero(out_dim)),
        inv_two_m_(1.0 / (2.0 * static_cast<double>(std::max<long long>(g.total_edges, 1)))) {}

  void add(int v, const Vector& pre_grad, double scale) {
    for (int u : graph_->neighbors(v)) dense_.row(u) += scale * pre_grad.transpose();
    rank1_ += (scale * static_cast<double>(graph_->degree(v)) * inv_two_m_) * pre_grad;
    if (graph_->features) {
      dense_.bottomRows(graph_->feature_dim()) +=
          scale * graph_->features->row(v).transpose() * pre_grad.transpose();
    }
  }

  Matrix finish() {
    for (int t = 0; t < graph_->n_nodes; ++t) {
      if (graph_->degree(t) > 0) {
        dense_.row(t) -= static_cast<double>(graph_->degree(t)) * rank1_.transpose();
      }
    }
    return std::move(dense_);
  }

 private:
  const Graph* graph_;
  Matrix dense_;
  Vector rank1_;
  double inv_two_m_;
};

// Sampled computation tree for one minibatch. frontier[l] holds the nodes
// whose layer-l codes are needed (frontier[L] is the batch, in batch order);
// samples[l][i] are the neighbors drawn for frontier[l+1][i].
struct BatchTree {
  std::vector<std::vector<int>> frontier;
  std::vector<std::vector<int>> position;  // node id -> row in frontier[l], -1 elsewhere
  std::vector<std::vector<std::vector<int>>> samples;
};

BatchTree build_tree(const Graph& g, const std::vector<int>& batch, int k, int layers, Rng& rng) {
  BatchTree tree;
  tree.frontier.resize(static_cast<size_t>(layers) + 1);
  tree.position.resize(static_cast<size_t>(layers) + 1);
  tree.samples.resize(static_cast<size_t>(layers));
  tree.frontier[static_cast<size_t>(layers)] = batch;
  for (int l = layers; l-- > 0;) {
    const auto& above = tree.frontier[static_cast<size_t>(l) + 1];
    auto& samp = tree.samples[static_cast<size_t>(l)];
    samp.resize(above.size());
    std::vector<int> seen(static_cast<size_t>(g.n_nodes), -1);
    auto& front = tree.frontier[static_cast<size_t>(l)];
    auto push = [&](int node) {
      if (seen[static_cast<size_t>(node)] < 0) {
        seen[static_cast<size_t>(node)] = static_cast<int>(front.size());
        front.push_back(node);
      }
    };
    for (int v : above) push(v);
    for (size_t i = 0; i < above.size(); ++i) {
      samp[i] = sample_neighbors(g, above[i], k, rng).sampled;
      for (int u : samp[i]) push(u);
    }
    tree.position[static_cast<size_t>(l)] = std::move(seen);
  }
  // positions for the batch layer
  tree.position[static_cast<size_t>(layers)].assign(static_cast<size_t>(g.n_nodes), -1);
  for (size_t i = 0; i < batch.size(); ++i) {
    tree.position[static_cast<size_t>(layers)][static_cast<size_t>(batch[i])] = static_cast<int>(i);
  }
  return tree;
}

struct ForwardState {
  // codes[l] (l >= 1): activations of frontier[l]; shared[l] the cached mean
  // inputs of layer l (projected space for layer 1, code space above).
  std::vector<Matrix> codes;
  std::vector<Matrix> shared;
};

ForwardState forward_tree(const Graph& g, const BatchTree& tree, const TwoStageModel& model,
                          InputProjector& self_proj, InputProjector& nbr_proj) {
  const int layers = static_cast<int>(model.weights.size());
  const double inv_k = 1.0 / static_cast<double>(model.config.neighbor_samples);
  ForwardState st;
  st.codes.resize(static_cast<size_t>(layers) + 1);
  st.shared.resize(static_cast<size_t>(layers) + 1);

  {
    // layer 1 works on projections of the raw input rows
    const auto& front = tree.frontier[1];
    const auto& below = tree.frontier[0];
    const Matrix& w = model.weights[0].w;
    self_proj.set_block(w, 0);
    nbr_proj.set_block(w, model.input_dim);
    Matrix nbr_cache(static_cast<Eigen::Index>(below.size()), w.cols());
    for (size_t i = 0; i < below.size(); ++i) {
      nbr_cache.row(static_cast<Eigen::Index>(i)) = nbr_proj.project(below[i]).transpose();
    }
    Matrix pre(static_cast<Eigen::Index>(front.size()), w.cols());
    for (size_t i = 0; i < front.size(); ++i) {
      Vector acc = self_proj.project(front[i]);
      for (int u : tree.samples[0][i]) {
        acc += inv_k * nbr_cache.row(tree.position[0][static_cast<size_t>(u)]).transpose();
      }
      pre.row(static_cast<Eigen::Index>(i)) = acc.transpose();
    }
    st.codes[1] = pre.array().tanh().matrix();
  }

  for (int l = 2; l <= layers; ++l) {
    const auto& front = tree.frontier[static_cast<size_t>(l)];
    const Matrix& prev = st.codes[static_cast<size_t>(l) - 1];
    const auto& prev_pos = tree.position[static_cast<size_t>(l) - 1];
    const Matrix& w = model.weights[static_cast<size_t>(l) - 1].w;
    const auto prev_dim = prev.cols();
    Matrix self_rows(static_cast<Eigen::Index>(front.size()), prev_dim);
    Matrix shared_rows(static_cast<Eigen::Index>(front.size()), prev_dim);
    for (size_t i = 0; i < front.size(); ++i) {
      self_rows.row(static_cast<Eigen::Index>(i)) = prev.row(prev_pos[static_cast<size_t>(front[i])]);
      Vector mean = Vector::Zero(prev_dim);
      for (int u : tree.samples[static_cast<size_t>(l) - 1][i]) {
        mean += prev.row(prev_pos[static_cast<size_t>(u)]).transpose();
      }
      shared_rows.row(static_cast<Eigen::Index>(i)) = (inv_k * mean).transpose();
    }
    st.shared[static_cast<size_t>(l)] = shared_rows;
    st.codes[static_cast<size_t>(l)] =
        (self_rows * w.topRows(prev_dim) + shared_rows * w.bottomRows(prev_dim))
            .array()
            .tanh()
            .matrix();
  }
  return st;
}

void backward_tree(const Graph& g, const BatchTree& tree, const TwoStageModel& model,
                   const ForwardState& st, const Matrix& d_batch, std::vector<Matrix>& grads) {
  const int layers = static_cast<int>(model.weights.size());
  const double inv_k = 1.0 / static_cast<double>(model.config.neighbor_samples);

  Matrix d_codes = d_batch;  // gradient w.r.t. codes[l] rows (frontier order)
  for (int l = layers; l >= 2; --l) {
    const auto& front = tree.frontier[static_cast<size_t>(l)];
    const Matrix& out = st.codes[static_cast<size_t>(l)];
    const Matrix& prev = st.codes[static_cast<size_t>(l) - 1];
    const auto& prev_pos = tree.position[static_cast<size_t>(l) - 1];
    const Matrix& w = model.weights[static_cast<size_t>(l) - 1].w;
    const auto prev_dim = prev.cols();

    Matrix pre_grad = (d_codes.array() * (1.0 - out.array().square())).matrix();
    Matrix self_rows(static_cast<Eigen::Index>(front.size()), prev_dim);
    for (size_t i = 0; i < front.size(); ++i) {
      self_rows.row(static_cast<Eigen::Index>(i)) = prev.row(prev_pos[static_cast<size_t>(front[i])]);
    }
    grads[static_cast<size_t>(l) - 1].topRows(prev_dim) += self_rows.transpose() * pre_grad;
    grads[static_cast<size_t>(l) - 1].bottomRows(prev_dim) +=
        st.shared[static_cast<size_t>(l)].transpose() * pre_grad;

    Matrix d_prev = Matrix::Zero(prev.rows(), prev_dim);
    Matrix via_self = pre_grad * w.topRows(prev_dim).transpose();
    Matrix via_shared = (inv_k * pre_grad) * w.bottomRows(prev_dim).transpose();
    for (size_t i = 0; i < front.size(); ++i) {
      d_prev.row(prev_pos[static_cast<size_t>(front[i])]) += via_self.row(static_cast<Eigen::Index>(i));
      for (int u : tree.samples[static_cast<size_t>(l) - 1][i]) {
        d_prev.row(prev_pos[static_cast<size_t>(u)]) += via_shared.row(static_cast<Eigen::Index>(i));
      }
    }
    d_codes = std::move(d_prev);
  }

  {
    const auto& front = tree.frontier[1];
    const Matrix& out = st.codes[1];
    Matrix pre_grad = (d_codes.array() * (1.0 - out.array().square())).matrix();
    InputGradAccumulator self_acc(g, pre_grad.cols());
    InputGradAccumulator nbr_acc(g, pre_grad.cols());
    for (size_t i = 0; i < front.size(); ++i) {
      const Vector pg = pre_grad.row(static_cast<Eigen::Index>(i)).transpose();
      self_acc.add(front[i], pg, 1.0);
      for (int u : tree.samples[0][i]) nbr_acc.add(u, pg, inv_k);
    }
    grads[0].topRows(model.input_dim) += self_acc.finish();
    grads[0].bottomRows(model.input_dim) += nbr_acc.finish();
  }
}

}  // namespace

double twostage_batch_gradients(const TwoStageModel& model, const Graph& g,
                                const std::vector<int>& batch, Rng& rng,
                                std::vector<Matrix>* grads) {
  if (model.input_dim != g.n_nodes + g.feature_dim()) {
    throw std::invalid_argument("batch gradients: graph does not match the model input width");
  }
  const int layers = static_cast<int>(model.weights.size());
  InputProjector self_proj(g);
  InputProjector nbr_proj(g);
  BatchTree tree = build_tree(g, batch, model.config.neighbor_samples, layers, rng);
  ForwardState st = forward_tree(g, tree, model, self_proj, nbr_proj);

  const Matrix& z = st.codes[static_cast<size_t>(layers)];
  // sub-block of B, built from degrees and adjacency on demand
  const double inv_two_m = 1.0 / (2.0 * static_cast<double>(g.total_edges));
  Matrix b_sub(batch.size(), batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    for (size_t j = 0; j < batch.size(); ++j) {
      double b = -static_cast<double>(g.degree(batch[i])) *
                 static_cast<double>(g.degree(batch[j])) * inv_two_m;
      if (g.has_edge(batch[i], batch[j])) b += 1.0;
      b_sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b;
    }
  }
  Matrix residual = z * z.transpose() - b_sub;
  const double loss = residual.squaredNorm();
  if (grads) {
    grads->clear();
    grads->reserve(model.weights.size());
    for (const auto& lw : model.weights) grads->push_back(Matrix::Zero(lw.w.rows(), lw.w.cols()));
    Matrix d_batch = 4.0 * (residual * z);
    backward_tree(g, tree, model, st, d_batch, *grads);
  }
  return loss;
}

void train_more(TwoStageModel& model, const Graph& g, int epochs, double learning_rate,
                std::vector<double>* loss_trace) {
  if (model.input_dim != g.n_nodes + g.feature_dim()) {
    throw std::invalid_argument("train_more: graph does not match the model input width");
  }
  Rng order_rng(derive_seed(model.config.seed, "twostage-batch-order"));
  Rng sample_rng(derive_seed(model.config.seed, "twostage-sampling"));

  std::vector<int> order(static_cast<size_t>(g.n_nodes));
  for (int i = 0; i < g.n_nodes; ++i) order[static_cast<size_t>(i)] = i;
  const int p = model.config.minibatch_size;

  std::vector<Matrix> grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(p)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(p));
      std::vector<int> batch(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(stop));
      const double loss = twostage_batch_gradients(model, g, batch, sample_rng, &grads);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("non-finite minibatch loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss;
      for (size_t l = 0; l < model.weights.size(); ++l) {
        adam_update(model.weights[l], grads[l], learning_rate);
      }
    }
    if (loss_trace) loss_trace->push_back(epoch_loss);
  }
}

std::pair<TwoStageModel, Matrix> train_twostage(const Graph& g, const TrainingConfig& config,
                                                std::vector<double>* loss_trace) {
  config.validate();
  if (g.total_edges < 1) throw std::invalid_argument("two-stage training needs at least one edge");

  TwoStageModel model;
  model.config = config;
  model.input_dim = g.n_nodes + g.feature_dim();

  int prev_dim = model.input_dim;
  for (size_t l = 0; l < config.layer_dims.size(); ++l) {
    model.weights.push_back(init_weights(2 * prev_dim, config.layer_dims[l],
                                         derive_seed(config.seed, "twostage-init", l)));
    prev_dim = config.layer_dims[l];
  }

  train_more(model, g, config.epochs, config.learning_rate, loss_trace);
  Matrix z = embed_twostage(model, g);
  return {std::move(model), std::move(z)};
}

Matrix embed_twostage(const TwoStageModel& model, const Graph& g) {
  return embed_twostage(model, g, derive_seed(model.config.seed, "twostage-embed"));
}

Matrix embed_twostage(const TwoStageModel& model, const Graph& g, uint64_t sample_seed) {
  if (model.input_dim != g.n_nodes + g.feature_dim()) {
    throw std::invalid_argument("embed: graph does not match the model input width");
  }
  Rng rng(sample_seed);
  const int k = model.config.neighbor_samples;
  const double inv_k = 1.0 / static_cast<double>(k);
  InputProjector self_proj(g);
  InputProjector nbr_proj(g);

  Matrix codes;
  for (size_t l = 0; l < model.weights.size(); ++l) {
    const Matrix& w = model.weights[l].w;
    Matrix next(g.n_nodes, w.cols());
    if (l == 0) {
      self_proj.set_block(w, 0);
      nbr_proj.set_block(w, model.input_dim);
      Matrix nbr_cache(g.n_nodes, w.cols());
      for (int v = 0; v < g.n_nodes; ++v) nbr_cache.row(v) = nbr_proj.project(v).transpose();
      for (int v = 0; v < g.n_nodes; ++v) {
        Vector acc = self_proj.project(v);
        for (int u : sample_neighbors(g, v, k, rng).sampled) {
          acc += inv_k * nbr_cache.row(u).transpose();
        }
        next.row(v) = acc.array().tanh().matrix().transpose();
      }
    } else {
      const auto prev_dim = codes.cols();
      for (int v = 0; v < g.n_nodes; ++v) {
        Vector mean = Vector::Zero(prev_dim);
        for (int u : sample_neighbors(g, v, k, rng).sampled) mean += codes.row(u).transpose();
        mean *= inv_k;
        Vector pre = w.topRows(prev_dim).transpose() * codes.row(v).transpose() +
                     w.bottomRows(prev_dim).transpose() * mean;
        next.row(v) = pre.array().tanh().matrix().transpose();
      }
    }
    codes = std::move(next);
  }
  return codes;
}

}  // namespace modae
