#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modae/modularity.hpp"
#include "modae/nn.hpp"
#include "modae/onestage.hpp"
#include "oracles.hpp"

using namespace modae;
namespace oracle = modae::testing;

TEST_CASE("weight init is deterministic and bounded") {
  LayerWeights a = init_weights(4, 2, 7);
  LayerWeights b = init_weights(4, 2, 7);
  CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);  // bit-identical

  LayerWeights big = init_weights(100, 50, 123);
  CHECK(big.w.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 150.0));
  CHECK(big.first_moment.cwiseAbs().maxCoeff() == 0.0);

  LayerWeights tiny = init_weights(1, 1, 0);
  CHECK(std::abs(tiny.w(0, 0)) <= std::sqrt(3.0));
  CHECK_THROWS(init_weights(0, 3, 1));
}

TEST_CASE("gcn layer forward") {
  Graph g = oracle::random_gnp(5, 0.5, 21);
  Matrix a_norm = normalized_adjacency(g);
  Matrix h = Matrix::Random(5, 3);

  LayerWeights zero;
  zero.w = Matrix::Zero(3, 2);
  CHECK(gcn_layer_forward(a_norm, h, zero).cwiseAbs().maxCoeff() == 0.0);

  // single isolated node: A_norm = [1]
  Matrix one = Matrix::Identity(1, 1);
  Matrix hx(1, 1);
  hx(0, 0) = 0.7;
  LayerWeights w1;
  w1.w = Matrix::Constant(1, 1, -0.4);
  CHECK(gcn_layer_forward(one, hx, w1)(0, 0) == doctest::Approx(std::tanh(0.7 * -0.4)));

  // the linear part matches a naive triple-loop product
  LayerWeights w = init_weights(3, 2, 5);
  Matrix linear = gcn_linear(a_norm, h, w.w);
  Matrix naive = oracle::naive_mul(oracle::naive_mul(a_norm, h), w.w);
  CHECK((linear - naive).cwiseAbs().maxCoeff() < 1e-12);

  Matrix out = gcn_layer_forward(a_norm, h, w);
  CHECK(out.cwiseAbs().maxCoeff() < 1.0);  // strictly inside (-1, 1)
  CHECK_THROWS(gcn_layer_forward(a_norm, h, init_weights(4, 2, 5)));
}

TEST_CASE("reconstruction loss") {
  Matrix z(2, 2);
  z << 1, 0, 0, 1;
  Matrix b = z * z.transpose();
  CHECK(reconstruction_loss(z, b) == doctest::Approx(0.0));

  Matrix zero = Matrix::Zero(2, 2);
  CHECK(reconstruction_loss(zero, b) == doctest::Approx(b.squaredNorm()));

  // double-loop summation oracle on a random instance
  Graph g = oracle::random_gnp(6, 0.5, 33);
  Matrix bm = modularity_matrix(g);
  Matrix zr = Matrix::Random(6, 3);
  Matrix recon = zr * zr.transpose();
  double manual = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) manual += (recon(i, j) - bm(i, j)) * (recon(i, j) - bm(i, j));
  }
  CHECK(reconstruction_loss(zr, bm) == doctest::Approx(manual).epsilon(1e-10));
  CHECK_THROWS(reconstruction_loss(Matrix::Random(3, 2), Matrix::Random(4, 4)));
}

TEST_CASE("embedding gradient: exact zero at a perfect reconstruction") {
  Matrix z(3, 2);
  z << 1, 0, 0, 1, 1, 1;
  Matrix b = z * z.transpose();
  CHECK(loss_gradient_wrt_embedding(z, b).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("embedding gradient: scalar case 4z(z^2-b)") {
  Matrix z(1, 1), b(1, 1);
  z(0, 0) = 0.8;
  b(0, 0) = 0.3;
  const double expected = 4.0 * 0.8 * (0.64 - 0.3);
  CHECK(loss_gradient_wrt_embedding(z, b)(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("embedding gradient matches finite differences") {
  Rng rng(5);
  Matrix z = Matrix::Random(8, 3);
  Graph g = oracle::random_gnp(8, 0.4, 55);
  Matrix b = modularity_matrix(g);
  Matrix analytic = loss_gradient_wrt_embedding(z, b);
  const double step = 1e-5;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) {
      Matrix zp = z, zm = z;
      zp(i, j) += step;
      zm(i, j) -= step;
      const double numeric = (reconstruction_loss(zp, b) - reconstruction_loss(zm, b)) / (2 * step);
      const double scale = std::max({1.0, std::abs(numeric), std::abs(analytic(i, j))});
      CHECK(std::abs(numeric - analytic(i, j)) / scale < 1e-5);
    }
  }
}

TEST_CASE("backprop through layers") {
  Graph g = oracle::random_gnp(6, 0.5, 77);
  Matrix a_norm = normalized_adjacency(g);
  Matrix input = Matrix::Random(6, 4);
  std::vector<LayerWeights> weights = {init_weights(4, 3, 1), init_weights(3, 2, 2)};
  ForwardCache cache = forward_all_layers(a_norm, input, weights);

  SUBCASE("zero upstream gives zero gradients") {
    auto grads = backprop_through_layers(cache, weights, Matrix::Zero(6, 2), a_norm);
    for (const auto& grad : grads) CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("single near-linear layer reduces to (A H)^T upstream") {
    // tiny weights keep tanh in its linear regime
    std::vector<LayerWeights> w1 = {init_weights(4, 2, 3)};
    w1[0].w *= 1e-6;
    ForwardCache c1 = forward_all_layers(a_norm, input, w1);
    Matrix upstream = Matrix::Random(6, 2);
    auto grads = backprop_through_layers(c1, w1, upstream, a_norm);
    Matrix expected = (a_norm * input).transpose() * upstream;
    CHECK((grads[0] - expected).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("two-layer weight gradients match finite differences of the full loss") {
    Graph gg = oracle::random_gnp(7, 0.5, 78);
    Matrix an = normalized_adjacency(gg);
    Matrix bm = modularity_matrix(gg);
    Matrix in = build_input(bm, gg);
    std::vector<LayerWeights> w = {init_weights(7, 4, 4), init_weights(4, 2, 5)};
    ForwardCache c = forward_all_layers(an, in, w);
    Matrix upstream = loss_gradient_wrt_embedding(c.activations.back(), bm);
    auto analytic = backprop_through_layers(c, w, upstream, an);
    auto loss_of = [&](const std::vector<Matrix>& params) {
      std::vector<LayerWeights> probe = w;
      for (size_t l = 0; l < probe.size(); ++l) probe[l].w = params[l];
      return reconstruction_loss(forward_all_layers(an, in, probe).activations.back(), bm);
    };
    GradCheckReport r = gradient_check(loss_of, {w[0].w, w[1].w}, analytic, 1e-4);
    CHECK(r.passed);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("adam update") {
  LayerWeights w = init_weights(2, 2, 9);
  Matrix before = w.w;

  SUBCASE("zero gradient leaves weights unchanged at step 1") {
    adam_update(w, Matrix::Zero(2, 2), 0.1);
    CHECK((w.w - before).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.step_count == 1);
  }

  SUBCASE("bias-corrected first step moves by about the learning rate") {
    LayerWeights s;
    s.w = Matrix::Zero(1, 1);
    s.first_moment = Matrix::Zero(1, 1);
    s.second_moment = Matrix::Zero(1, 1);
    adam_update(s, Matrix::Constant(1, 1, 1.0), 0.1);
    CHECK(s.w(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
  }

  SUBCASE("identical calls from identical state are bit-identical") {
    LayerWeights a = init_weights(3, 3, 4);
    LayerWeights b = init_weights(3, 3, 4);
    Matrix grad = Matrix::Random(3, 3);
    adam_update(a, grad, 0.01);
    adam_update(b, grad, 0.01);
    CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("non-finite gradients are rejected") {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(adam_update(w, bad, 0.1));
  }
}

TEST_CASE("gradient checker") {
  SUBCASE("quadratic function is exact to roundoff") {
    auto loss = [](const std::vector<Matrix>& p) { return p[0].squaredNorm(); };
    Matrix x = Matrix::Random(3, 3);
    GradCheckReport r = gradient_check(loss, {x}, {2.0 * x}, 1e-9);
    CHECK(r.passed);
    CHECK(r.max_rel_error < 1e-9);
  }

  SUBCASE("a corrupted gradient is detected") {
    auto loss = [](const std::vector<Matrix>& p) { return p[0].squaredNorm(); };
    Matrix x = Matrix::Constant(2, 2, 1.5);
    Matrix wrong = 2.0 * x * 1.10;  // 10 percent off
    GradCheckReport r = gradient_check(loss, {x}, {wrong}, 1e-4);
    CHECK_FALSE(r.passed);
  }
}

TEST_CASE("training step decreases loss on a toy graph") {
  Graph g = oracle::two_triangles();
  Matrix b = modularity_matrix(g);
  TrainingConfig cfg;
  cfg.layer_dims = {4, 2};
  cfg.epochs = 0;
  cfg.learning_rate = 1e-3;
  cfg.seed = 3;
  OneStageModel model = train_onestage(g, cfg).first;
  double prev = reconstruction_loss(embed(model), b);
  for (int step = 0; step < 10; ++step) {
    onestage_epoch(model, b);
    const double cur = reconstruction_loss(embed(model), b);
    CHECK(cur < prev);  // strict descent over the first steps
    prev = cur;
  }
}

TEST_CASE("analytic gradients match finite differences on many random instances") {
  int checked = 0;
  for (uint64_t seed = 1; seed <= 22; ++seed) {
    Graph g = oracle::random_gnp(4 + static_cast<int>(seed % 9), 0.5, seed * 13);
    Matrix a_norm = normalized_adjacency(g);
    Matrix b = modularity_matrix(g);
    Matrix input = build_input(b, g);
    std::vector<LayerWeights> w = {init_weights(g.n_nodes, 4, seed),
                                   init_weights(4, 3, seed + 1000)};
    ForwardCache cache = forward_all_layers(a_norm, input, w);
    Matrix upstream = loss_gradient_wrt_embedding(cache.activations.back(), b);
    auto analytic = backprop_through_layers(cache, w, upstream, a_norm);
    auto loss_of = [&](const std::vector<Matrix>& params) {
      std::vector<LayerWeights> probe = w;
      for (size_t l = 0; l < probe.size(); ++l) probe[l].w = params[l];
      return reconstruction_loss(forward_all_layers(a_norm, input, probe).activations.back(), b);
    };
    GradCheckReport r = gradient_check(loss_of, {w[0].w, w[1].w}, analytic, 1e-4);
    CHECK(r.passed);
    ++checked;
  }
  CHECK(checked >= 20);
}
