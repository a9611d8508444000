#include "modae/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "modae/modularity.hpp"

namespace modae {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kOneStage: return "onestage";
    case ModelKind::kTwoStage: return "twostage";
    case ModelKind::kGae: return "gae";
  }
  throw std::logic_error("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "onestage") return ModelKind::kOneStage;
  if (name == "twostage") return ModelKind::kTwoStage;
  if (name == "gae") return ModelKind::kGae;
  throw std::invalid_argument("unknown model kind: " + name);
}

namespace {

constexpr const char* kMagic = "modae-checkpoint";
constexpr int kVersion = 1;

std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& tok, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error(path + ": bad numeric token '" + tok + "'");
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << kMagic << " v" << kVersion << "\n";
  out << "kind " << model_kind_name(c.kind) << "\n";
  out << "seed " << c.config.seed << "\n";
  out << "learning_rate " << hex_double(c.config.learning_rate) << "\n";
  out << "epochs " << c.config.epochs << "\n";
  out << "minibatch " << c.config.minibatch_size << "\n";
  out << "samples " << c.config.neighbor_samples << "\n";
  out << "decoder " << (c.config.decoder == Decoder::kIdentity ? "identity" : "tanh") << "\n";
  out << "input_dim " << c.input_dim << "\n";
  out << "n_nodes " << c.n_nodes << "\n";
  out << "dims";
  for (int d : c.config.layer_dims) out << ' ' << d;
  out << "\n";
  for (size_t l = 0; l < c.weights.size(); ++l) {
    const Matrix& w = c.weights[l];
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << "\n";
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        out << hex_double(w(i, j)) << (j + 1 == w.cols() ? '\n' : ' ');
      }
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("failed while writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  Checkpoint c;
  std::string word;
  in >> word;
  std::string version;
  in >> version;
  if (word != kMagic || version != "v1") {
    throw std::runtime_error(path + ": not a recognized checkpoint file");
  }
  auto expect = [&](const std::string& key) {
    in >> word;
    if (word != key) throw std::runtime_error(path + ": expected '" + key + "', got '" + word + "'");
  };
  expect("kind");
  in >> word;
  c.kind = model_kind_from_name(word);
  expect("seed");
  in >> c.config.seed;
  expect("learning_rate");
  in >> word;
  c.config.learning_rate = parse_double(word, path);
  expect("epochs");
  in >> c.config.epochs;
  expect("minibatch");
  in >> c.config.minibatch_size;
  expect("samples");
  in >> c.config.neighbor_samples;
  expect("decoder");
  in >> word;
  c.config.decoder = (word == "tanh") ? Decoder::kTanh : Decoder::kIdentity;
  expect("input_dim");
  in >> c.input_dim;
  expect("n_nodes");
  in >> c.n_nodes;
  expect("dims");
  c.config.layer_dims.clear();
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream ds(rest);
    int d;
    while (ds >> d) c.config.layer_dims.push_back(d);
  }
  if (c.config.layer_dims.empty()) throw std::runtime_error(path + ": no layer dims");

  while (in >> word) {
    if (word == "end") break;
    if (word != "weights") throw std::runtime_error(path + ": unexpected token '" + word + "'");
    size_t index;
    Eigen::Index rows, cols;
    in >> index >> rows >> cols;
    if (!in || rows <= 0 || cols <= 0) throw std::runtime_error(path + ": bad weight header");
    if (index != c.weights.size()) throw std::runtime_error(path + ": weights out of order");
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        in >> word;
        w(i, j) = parse_double(word, path);
      }
    }
    c.weights.push_back(std::move(w));
  }
  if (word != "end") throw std::runtime_error(path + ": truncated checkpoint");
  return c;
}

Checkpoint to_checkpoint(const OneStageModel& model) {
  Checkpoint c;
  c.kind = ModelKind::kOneStage;
  c.config = model.config;
  c.input_dim = static_cast<int>(model.input.cols());
  c.n_nodes = static_cast<int>(model.input.rows());
  for (const auto& lw : model.weights) c.weights.push_back(lw.w);
  return c;
}

Checkpoint to_checkpoint(const TwoStageModel& model) {
  Checkpoint c;
  c.kind = ModelKind::kTwoStage;
  c.config = model.config;
  c.input_dim = model.input_dim;
  c.n_nodes = 0;  // two-stage weights carry the input width; N is not needed
  for (const auto& lw : model.weights) c.weights.push_back(lw.w);
  return c;
}

Checkpoint to_checkpoint(const GaeModel& model, const TrainingConfig& config) {
  Checkpoint c;
  c.kind = ModelKind::kGae;
  c.config = config;
  c.input_dim = static_cast<int>(model.input.cols());
  c.n_nodes = static_cast<int>(model.a_norm.rows());
  c.weights = {model.w0.w, model.w1.w};
  return c;
}

namespace {

LayerWeights as_layer(const Matrix& w) {
  LayerWeights lw;
  lw.w = w;
  lw.first_moment = Matrix::Zero(w.rows(), w.cols());
  lw.second_moment = Matrix::Zero(w.rows(), w.cols());
  return lw;
}

}  // namespace

TwoStageModel twostage_from_checkpoint(const Checkpoint& c) {
  if (c.kind != ModelKind::kTwoStage) throw std::invalid_argument("checkpoint is not two-stage");
  TwoStageModel m;
  m.config = c.config;
  m.input_dim = c.input_dim;
  for (const auto& w : c.weights) m.weights.push_back(as_layer(w));
  return m;
}

OneStageModel onestage_from_checkpoint(const Checkpoint& c, const Graph& g) {
  if (c.kind != ModelKind::kOneStage) throw std::invalid_argument("checkpoint is not one-stage");
  if (g.n_nodes + g.feature_dim() != c.input_dim) {
    throw std::invalid_argument("checkpoint input width does not match the graph");
  }
  OneStageModel m;
  m.config = c.config;
  m.a_norm = normalized_adjacency(g);
  m.input = build_input(modularity_matrix(g), g);
  for (const auto& w : c.weights) m.weights.push_back(as_layer(w));
  return m;
}

GaeModel gae_from_checkpoint(const Checkpoint& c, const Graph& g) {
  if (c.kind != ModelKind::kGae) throw std::invalid_argument("checkpoint is not gae");
  GaeModel m;
  m.a_norm = normalized_adjacency(g);
  m.input = g.features ? *g.features : Matrix(Matrix::Identity(g.n_nodes, g.n_nodes));
  if (m.input.cols() != c.input_dim) {
    throw std::invalid_argument("checkpoint input width does not match the graph");
  }
  if (c.weights.size() != 2) throw std::invalid_argument("gae checkpoint needs two layers");
  m.w0 = as_layer(c.weights[0]);
  m.w1 = as_layer(c.weights[1]);
  return m;
}

}  // namespace modae
