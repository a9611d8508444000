#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "modae/graph.hpp"
#include "modae/modularity.hpp"
#include "oracles.hpp"

using namespace modae;
namespace oracle = modae::testing;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string data_path(const std::string& rel) { return std::string(MODAE_DATA_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("edge list loading drops self-loops and duplicates") {
  auto path = write_temp("modae_dup.txt", "a b\nb a\na a\n");
  LoadStats stats;
  Graph g = load_edge_list(path, false, &stats);
  CHECK(g.n_nodes == 2);
  CHECK(g.total_edges == 1);
  CHECK(stats.self_loops_dropped == 1);
  CHECK(stats.duplicates_dropped == 1);
  CHECK(g.node_names[0] == "a");  // first-appearance order
  CHECK(g.node_names[1] == "b");
}

TEST_CASE("edge list loader errors") {
  CHECK_THROWS(load_edge_list("/nonexistent/file.txt"));
  auto bad = write_temp("modae_bad.txt", "a b c\n");
  CHECK_THROWS(load_edge_list(bad));
  auto empty = write_temp("modae_empty.txt", "# nothing here\n");
  CHECK_THROWS(load_edge_list(empty));
}

TEST_CASE("comment lines and id remapping") {
  auto path = write_temp("modae_comment.txt", "# header\nx y\ny z\n");
  Graph g = load_edge_list(path);
  CHECK(g.n_nodes == 3);
  CHECK(g.total_edges == 2);
  CHECK(g.name_to_index.at("x") == 0);
  CHECK(g.name_to_index.at("z") == 2);
  CHECK(g.degree(1) == 2);
}

TEST_CASE("karate dataset loads with the documented size") {
  Graph g = load_edge_list(data_path("karate/edges.txt"));
  CHECK(g.n_nodes == 34);
  CHECK(g.total_edges == 78);
  long long degree_sum = 0;
  for (int v = 0; v < g.n_nodes; ++v) degree_sum += g.degree(v);
  CHECK(degree_sum == 2 * g.total_edges);
}

TEST_CASE("les miserables dataset loads with the documented size") {
  Graph g = load_edge_list(data_path("lesmis/edges.txt"));
  CHECK(g.n_nodes == 77);
  CHECK(g.total_edges == 254);
}

TEST_CASE("feature loading: identity rows stay unit norm") {
  auto edges = write_temp("modae_f_edges.txt", "0 1\n1 2\n");
  Graph g = load_edge_list(edges);
  auto feats = write_temp("modae_f_id.txt", "1,0,0\n0,1,0\n0,0,1\n");
  load_features(feats, g);
  REQUIRE(g.features.has_value());
  CHECK((*g.features - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("feature loading: rows are L2-normalized") {
  auto edges = write_temp("modae_f2_edges.txt", "0 1\n");
  Graph g = load_edge_list(edges);
  auto feats = write_temp("modae_f2.txt", "3,4\n0,0\n");
  load_features(feats, g);
  CHECK((*g.features)(0, 0) == doctest::Approx(0.6));
  CHECK((*g.features)(0, 1) == doctest::Approx(0.8));
  CHECK((*g.features)(1, 0) == 0.0);  // zero row stays zero
}

TEST_CASE("feature loading: labeled variant and errors") {
  auto edges = write_temp("modae_f3_edges.txt", "b a\n");
  Graph g = load_edge_list(edges);
  auto labeled = write_temp("modae_f3.txt", "a 0 1\nb 1 0\n");
  load_features(labeled, g);
  CHECK((*g.features)(g.name_to_index.at("a"), 1) == doctest::Approx(1.0));

  auto wrong_rows = write_temp("modae_f4.txt", "1,2\n");
  CHECK_THROWS(load_features(wrong_rows, g));
  auto bad_cell = write_temp("modae_f5.txt", "1,oops\n2,3\n");
  CHECK_THROWS(load_features(bad_cell, g));
}

TEST_CASE("label loading") {
  auto edges = write_temp("modae_l_edges.txt", "a b\nb c\n");
  Graph g = load_edge_list(edges);
  auto labels = write_temp("modae_l.txt", "a red\nb red\nc blue\n");
  load_labels(labels, g);
  REQUIRE(g.labels.has_value());
  CHECK(g.label_count() == 2);
  CHECK((*g.labels)[0] == (*g.labels)[1]);
  CHECK((*g.labels)[0] != (*g.labels)[2]);

  auto partial = write_temp("modae_l2.txt", "a 0\n");
  CHECK_THROWS(load_labels(partial, g));
}

TEST_CASE("modularity matrix on the triangle graph") {
  Graph g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  Matrix b = modularity_matrix(g);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(b(i, j) == doctest::Approx(i == j ? -2.0 / 3.0 : 1.0 / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("modularity matrix: symmetry, zero row sums, brute-force agreement") {
  Graph karate = load_edge_list(data_path("karate/edges.txt"));
  Matrix b = modularity_matrix(karate);
  CHECK((b - b.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  Matrix brute = oracle::brute_modularity_matrix(karate);
  CHECK((b - brute).cwiseAbs().maxCoeff() < 1e-12);

  Graph empty_ok = make_graph(3, {});
  CHECK_THROWS(modularity_matrix(empty_ok));
}

TEST_CASE("modularity rows match the dense matrix") {
  Graph g = oracle::random_gnp(20, 0.2, 99);
  Matrix b = modularity_matrix(g);
  for (int i = 0; i < g.n_nodes; ++i) {
    CHECK((modularity_row(g, i).transpose() - b.row(i)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("normalized adjacency basics") {
  Graph single = make_graph(1, {});
  Matrix a1 = normalized_adjacency(single);
  CHECK(a1.rows() == 1);
  CHECK(a1(0, 0) == doctest::Approx(1.0));

  Graph pair = make_graph(2, {{0, 1}});
  Matrix a2 = normalized_adjacency(pair);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(a2(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  }

  // isolated nodes keep a unit diagonal entry
  Graph iso = make_graph(3, {{0, 1}});
  CHECK(normalized_adjacency(iso)(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("normalized adjacency spectral radius stays at most 1") {
  Graph karate = load_edge_list(data_path("karate/edges.txt"));
  Matrix a = normalized_adjacency(karate);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(oracle::power_iteration_radius(a) <= 1.0 + 1e-9);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 1.0);
}

TEST_CASE("modularity score: all-one-community partition gives exactly zero") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Graph g = oracle::random_gnp(30, 0.15, seed);
    CHECK(std::abs(modularity_score(g, CommunityAssignment::single_community(g.n_nodes))) < 1e-12);
  }
}

TEST_CASE("modularity score matches both oracle forms on karate") {
  Graph karate = load_edge_list(data_path("karate/edges.txt"));
  load_labels(data_path("karate/labels.txt"), karate);
  auto assignment = CommunityAssignment::from_labels(*karate.labels);
  const double q = modularity_score(karate, assignment);
  const double q_loop = oracle::double_loop_q(karate, assignment.labels);
  const double q_trace = oracle::trace_form_q(karate, assignment.labels);
  CHECK(std::abs(q - q_loop) < 1e-12);
  CHECK(std::abs(q_loop - q_trace) < 1e-12);
  CHECK(q == doctest::Approx(0.3582347140).epsilon(1e-6));  // the known faction split
}

TEST_CASE("two disjoint triangles at their natural split") {
  Graph g = oracle::two_triangles();
  CommunityAssignment split = CommunityAssignment::from_labels({0, 0, 0, 1, 1, 1});
  const double q = modularity_score(g, split);
  CHECK(q == doctest::Approx(oracle::double_loop_q(g, split.labels)).epsilon(1e-12));
  CHECK(q == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("modularity score is invariant under node relabeling") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g = oracle::random_gnp(25, 0.2, 100 + static_cast<uint64_t>(trial));
    std::vector<int> labels = oracle::random_labels(g.n_nodes, 3, 17 + static_cast<uint64_t>(trial));
    std::vector<int> perm(static_cast<size_t>(g.n_nodes));
    for (int i = 0; i < g.n_nodes; ++i) perm[static_cast<size_t>(i)] = i;
    rng.shuffle(perm);

    std::vector<std::pair<int, int>> mapped;
    for (auto [u, v] : g.edges) {
      mapped.emplace_back(perm[static_cast<size_t>(u)], perm[static_cast<size_t>(v)]);
    }
    Graph permuted = make_graph(g.n_nodes, mapped);
    std::vector<int> mapped_labels(static_cast<size_t>(g.n_nodes));
    for (int i = 0; i < g.n_nodes; ++i) {
      mapped_labels[static_cast<size_t>(perm[static_cast<size_t>(i)])] = labels[static_cast<size_t>(i)];
    }
    const double q1 = modularity_score(g, CommunityAssignment::from_labels(labels));
    const double q2 = modularity_score(permuted, CommunityAssignment::from_labels(mapped_labels));
    CHECK(std::abs(q1 - q2) < 1e-12);
  }
}

TEST_CASE("double-loop and trace forms agree on random graphs") {
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = oracle::random_gnp(40 + 16 * trial, 0.08, 500 + static_cast<uint64_t>(trial));
    std::vector<int> labels = oracle::random_labels(g.n_nodes, 4, 900 + static_cast<uint64_t>(trial));
    const double q_loop = oracle::double_loop_q(g, labels);
    const double q_trace = oracle::trace_form_q(g, labels);
    const double q_fast = modularity_score(g, CommunityAssignment::from_labels(labels));
    CHECK(std::abs(q_loop - q_trace) < 1e-12);
    CHECK(std::abs(q_loop - q_fast) < 1e-12);
  }
}

TEST_CASE("coverage mismatch is rejected") {
  Graph g = oracle::two_triangles();
  CommunityAssignment bad = CommunityAssignment::from_labels({0, 0, 1});
  CHECK_THROWS(modularity_score(g, bad));
}
