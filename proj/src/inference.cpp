#include "modae/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "modae/modularity.hpp"

namespace modae {

namespace {

// Same fill rules as sample_neighbors, applied to an explicit sorted list
// (used for the new node, whose neighborhood is its stub list).
std::vector<int> sample_from_list(const std::vector<int>& sorted_list, int k, Rng& rng) {
  const int n = static_cast<int>(sorted_list.size());
  std::vector<int> out;
  out.reserve(static_cast<size_t>(k));
  if (n >= k) {
    for (int i : rng.sample_indices(n, k)) out.push_back(sorted_list[static_cast<size_t>(i)]);
  } else {
    for (int i = 0; i < k; ++i) out.push_back(sorted_list[static_cast<size_t>(i % n)]);
  }
  return out;
}

int distinct_overlap(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  int count = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

std::vector<int> sorted_unique_stubs(const NewNode& node, int n_nodes) {
  if (node.stubs.empty()) throw std::invalid_argument("new node has no stubs");
  std::vector<int> stubs = node.stubs;
  std::sort(stubs.begin(), stubs.end());
  stubs.erase(std::unique(stubs.begin(), stubs.end()), stubs.end());
  if (stubs.front() < 0 || stubs.back() >= n_nodes) {
    throw std::invalid_argument("new node stub out of range");
  }
  return stubs;
}

}  // namespace

FeatureAlignment align_features(const Graph& g, const NewNode& node, int k, Rng& rng) {
  std::vector<int> stubs = sorted_unique_stubs(node, g.n_nodes);
  FeatureAlignment result;
  result.sample = sample_from_list(stubs, k, rng);
  // strict improvement scan; zero overlap everywhere keeps index 0
  result.chosen_sample_index = 0;
  result.overlap = 0;
  for (int j = 0; j < k; ++j) {
    const int candidate = result.sample[static_cast<size_t>(j)];
    const int common =
        distinct_overlap(sample_neighbors(g, candidate, k, rng).sampled, result.sample);
    if (common > result.overlap) {
      result.overlap = common;
      result.chosen_sample_index = j;
    }
  }
  result.chosen_node = result.sample[static_cast<size_t>(result.chosen_sample_index)];
  return result;
}

Vector aligned_input_row(const Graph& g, const FeatureAlignment& alignment, const NewNode& node) {
  Vector b = modularity_row(g, alignment.chosen_node);
  if (!g.features) return b;
  if (!node.raw_features) throw std::invalid_argument("new node lacks features on a featured graph");
  Vector out(g.n_nodes + g.feature_dim());
  out.head(g.n_nodes) = b;
  out.tail(g.feature_dim()) = *node.raw_features;
  return out;
}

Matrix attention_alpha_from_dots(const Matrix& dots, int width) {
  if (dots.rows() != dots.cols()) throw std::invalid_argument("attention: dot matrix must be square");
  if (!dots.allFinite()) throw std::invalid_argument("attention: non-finite inputs");
  Matrix scaled = dots / std::sqrt(static_cast<double>(width));
  Matrix alpha(scaled.rows(), scaled.cols());
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
    const double row_max = scaled.row(i).maxCoeff();
    Eigen::ArrayXd e = (scaled.row(i).array() - row_max).exp();
    alpha.row(i) = (e / e.sum()).matrix();
  }
  return alpha;
}

Matrix peer_attention_alpha(const Matrix& rows) {
  return attention_alpha_from_dots(rows * rows.transpose(), static_cast<int>(rows.cols()));
}

Matrix peer_attention(const Matrix& rows) {
  if (rows.rows() < 1 || rows.cols() < 1) throw std::invalid_argument("attention: empty input");
  return peer_attention_alpha(rows) * rows;
}

IncrementalInference::IncrementalInference(const TwoStageModel& model, const Graph& base,
                                           CommunityAssignment communities)
    : model_(model),
      base_(base),
      communities_(std::move(communities)),
      self_proj_(base),
      nbr_proj_(base) {
  if (model_.input_dim != base.n_nodes + base.feature_dim()) {
    throw std::invalid_argument("inference: model input width does not match the base graph");
  }
  if (communities_.centroids.rows() == 0) {
    throw std::invalid_argument("inference: missing centroids (fit clustering first)");
  }
  self_proj_.set_block(model_.weights[0].w, 0);
  nbr_proj_.set_block(model_.weights[0].w, model_.input_dim);

  neighbor_degree_sum_ = Vector::Zero(base.n_nodes);
  for (int v = 0; v < base.n_nodes; ++v) {
    double s = 0.0;
    for (int u : base.neighbors(v)) s += static_cast<double>(base.degree(u));
    neighbor_degree_sum_(v) = s;
  }
  for (int v = 0; v < base.n_nodes; ++v) {
    const double kd = static_cast<double>(base.degree(v));
    sum_sq_degrees_ += kd * kd;
  }
  inv_two_m_ = 1.0 / (2.0 * static_cast<double>(base.total_edges));
}

double IncrementalInference::input_dot(int u, int v) const {
  const auto& nu = base_.neighbors(u);
  const auto& nv = base_.neighbors(v);
  int common = 0;
  size_t i = 0, j = 0;
  while (i < nu.size() && j < nv.size()) {
    if (nu[i] < nv[j]) {
      ++i;
    } else if (nv[j] < nu[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const double ku = static_cast<double>(base_.degree(u));
  const double kv = static_cast<double>(base_.degree(v));
  double dot = static_cast<double>(common) - ku * inv_two_m_ * neighbor_degree_sum_(v) -
               kv * inv_two_m_ * neighbor_degree_sum_(u) +
               ku * kv * inv_two_m_ * inv_two_m_ * sum_sq_degrees_;
  if (base_.features) {
    dot += base_.features->row(u).dot(base_.features->row(v));
  }
  return dot;
}

void IncrementalInference::check(const NewNode& node) const {
  if (base_.features && !node.raw_features) {
    throw std::invalid_argument("inference: new node lacks features on a featured graph");
  }
  if (node.raw_features && node.raw_features->size() != base_.feature_dim()) {
    throw std::invalid_argument("inference: feature width mismatch");
  }
}

IncrementalInference::Result IncrementalInference::infer_plain(const NewNode& node,
                                                               Rng& rng) const {
  check(node);
  std::vector<int> stubs = sorted_unique_stubs(node, base_.n_nodes);
  const int k = model_.config.neighbor_samples;
  const double inv_k = 1.0 / static_cast<double>(k);
  const int layers = static_cast<int>(model_.weights.size());
  const Vector* feat = node.raw_features ? &*node.raw_features : nullptr;

  // memoized layer codes for base-graph nodes reached by the sampling tree
  std::vector<std::unordered_map<int, Vector>> memo(static_cast<size_t>(layers) + 1);
  std::function<Vector(int, int)> code = [&](int layer, int v) -> Vector {
    auto it = memo[static_cast<size_t>(layer)].find(v);
    if (it != memo[static_cast<size_t>(layer)].end()) return it->second;
    const auto sample = sample_neighbors(base_, v, k, rng).sampled;
    Vector pre;
    if (layer == 1) {
      pre = self_proj_.project(v);
      for (int u : sample) pre += inv_k * nbr_proj_.project(u);
    } else {
      Vector self = code(layer - 1, v);
      Vector mean = Vector::Zero(self.size());
      for (int u : sample) mean += code(layer - 1, u);
      mean *= inv_k;
      const Matrix& w = model_.weights[static_cast<size_t>(layer) - 1].w;
      pre = w.topRows(self.size()).transpose() * self + w.bottomRows(self.size()).transpose() * mean;
    }
    Vector out = pre.array().tanh().matrix();
    memo[static_cast<size_t>(layer)].emplace(v, out);
    return out;
  };

  // the new node's own row derives from its stubs; samples are drawn from them
  Vector self_code;
  for (int layer = 1; layer <= layers; ++layer) {
    const auto sample = sample_from_list(stubs, k, rng);
    Vector pre;
    if (layer == 1) {
      pre = self_proj_.project_attached(stubs, feat);
      for (int u : sample) pre += inv_k * nbr_proj_.project(u);
    } else {
      Vector mean = Vector::Zero(self_code.size());
      for (int u : sample) mean += code(layer - 1, u);
      mean *= inv_k;
      const Matrix& w = model_.weights[static_cast<size_t>(layer) - 1].w;
      pre = w.topRows(self_code.size()).transpose() * self_code +
            w.bottomRows(self_code.size()).transpose() * mean;
    }
    self_code = pre.array().tanh().matrix();
  }

  Result r;
  r.embedding = std::move(self_code);
  r.community = assign_nearest(communities_.centroids, r.embedding);
  return r;
}

IncrementalInference::Result IncrementalInference::infer_apam(const NewNode& node,
                                                              Rng& rng) const {
  check(node);
  const int layers = static_cast<int>(model_.weights.size());
  if (layers > 2) {
    throw std::invalid_argument("attentive inference is defined for 1- and 2-layer models");
  }
  const int k = model_.config.neighbor_samples;
  const double inv_k = 1.0 / static_cast<double>(k);
  const Vector* feat = node.raw_features ? &*node.raw_features : nullptr;

  FeatureAlignment alignment = align_features(base_, node, k, rng);
  const std::vector<int>& sample = alignment.sample;

  // peer attention over the sampled neighbors' input rows; the sparse dot
  // formula mirrors <row_u, row_v> exactly
  Matrix dots(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double d = input_dot(sample[static_cast<size_t>(i)], sample[static_cast<size_t>(j)]);
      dots(i, j) = d;
      dots(j, i) = d;
    }
  }
  Matrix alpha = attention_alpha_from_dots(dots, model_.input_dim);

  // projections of the sampled rows through both weight halves
  Matrix nbr_rows(k, model_.weights[0].w.cols());
  for (int j = 0; j < k; ++j) {
    nbr_rows.row(j) = nbr_proj_.project(sample[static_cast<size_t>(j)]).transpose();
  }

  // shared term: MEAN of the attention-mixed rows is a fixed mix of the
  // original rows with weights = column means of alpha
  Vector mix = alpha.colwise().mean().transpose();
  Vector aligned_self = self_proj_.project_structural(alignment.chosen_node);
  if (feat) aligned_self += self_proj_.project_features(*feat);
  Vector pre1 = aligned_self + nbr_rows.transpose() * mix;
  Vector h1 = pre1.array().tanh().matrix();

  Result r;
  if (layers == 1) {
    r.embedding = std::move(h1);
  } else {
    // the second layer aggregates plainly over the same neighbor set: the
    // attention pass enriches the new node's neighborhood mean, while the
    // neighbors' own first-layer codes are computed exactly as in training
    const auto d1 = model_.weights[0].w.cols();
    Matrix h1_neighbors(k, d1);
    for (int i = 0; i < k; ++i) {
      Vector pre = self_proj_.project(sample[static_cast<size_t>(i)]);
      for (int u : sample_neighbors(base_, sample[static_cast<size_t>(i)], k, rng).sampled) {
        pre += inv_k * nbr_proj_.project(u);
      }
      h1_neighbors.row(i) = pre.array().tanh().matrix().transpose();
    }
    const Matrix& w2 = model_.weights[1].w;
    Vector mean = h1_neighbors.colwise().mean().transpose();
    Vector pre2 = w2.topRows(d1).transpose() * h1 + w2.bottomRows(d1).transpose() * mean;
    r.embedding = pre2.array().tanh().matrix();
  }
  r.community = assign_nearest(communities_.centroids, r.embedding);
  return r;
}

TwoStageModel truncate_and_finetune(const TwoStageModel& trained, const Graph& g, int layers,
                                    int epochs, double learning_rate, uint64_t seed) {
  if (layers < 1 || layers > static_cast<int>(trained.weights.size())) {
    throw std::invalid_argument("finetune: layer count out of range");
  }
  TwoStageModel model;
  model.input_dim = trained.input_dim;
  model.config = trained.config;
  model.config.layer_dims.assign(trained.config.layer_dims.begin(),
                                 trained.config.layer_dims.begin() + layers);
  model.config.epochs = epochs;
  model.config.learning_rate = learning_rate;
  model.config.seed = seed;
  for (int l = 0; l < layers; ++l) {
    LayerWeights lw;
    lw.w = trained.weights[static_cast<size_t>(l)].w;
    lw.first_moment = Matrix::Zero(lw.w.rows(), lw.w.cols());
    lw.second_moment = Matrix::Zero(lw.w.rows(), lw.w.cols());
    model.weights.push_back(std::move(lw));
  }
  train_more(model, g, epochs, learning_rate);
  return model;
}

}  // namespace modae
