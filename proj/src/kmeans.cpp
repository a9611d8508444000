#include "modae/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "modae/modularity.hpp"

namespace modae {

namespace {

constexpr double kShiftTolerance = 1e-8;
constexpr int kMaxIterations = 300;

Matrix seed_centroids(const Matrix& z, int k, Rng& rng) {
  const auto n = z.rows();
  Matrix centroids(k, z.cols());
  const auto first = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
  centroids.row(0) = z.row(first);
  Vector dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist2(i) = (z.row(i) - centroids.row(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double r = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc >= r) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
    }
    centroids.row(c) = z.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i), (z.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& z, int k, uint64_t seed) {
  Rng rng(seed);
  const auto n = z.rows();
  KMeansResult result;
  result.centroids = seed_centroids(z, k, rng);
  result.labels.assign(static_cast<size_t>(n), 0);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // assign
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = assign_nearest(result.centroids, z.row(i).transpose());
      result.labels[static_cast<size_t>(i)] = best;
      inertia += (z.row(i) - result.centroids.row(best)).squaredNorm();
    }
    result.inertia = inertia;
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;

    // update
    Matrix next = Matrix::Zero(k, z.cols());
    std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(result.labels[static_cast<size_t>(i)]) += z.row(i);
      ++counts[static_cast<size_t>(result.labels[static_cast<size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
      } else {
        // re-seed an empty cluster at the point farthest from its centroid
        double worst = -1.0;
        Eigen::Index pick = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (z.row(i) - result.centroids.row(result.labels[static_cast<size_t>(i)]))
                               .squaredNorm();
          if (d > worst) {
            worst = d;
            pick = i;
          }
        }
        next.row(c) = z.row(pick);
      }
    }
    const double shift = (next - result.centroids).rowwise().norm().maxCoeff();
    result.centroids = next;
    if (shift < kShiftTolerance) break;
  }

  // final assignment against the converged centroids
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = assign_nearest(result.centroids, z.row(i).transpose());
    result.labels[static_cast<size_t>(i)] = best;
    inertia += (z.row(i) - result.centroids.row(best)).squaredNorm();
  }
  result.inertia = inertia;
  result.inertia_trace.push_back(inertia);
  return result;
}

}  // namespace

int assign_nearest(const Matrix& centroids, const Vector& z) {
  if (centroids.rows() == 0) throw std::invalid_argument("assign_nearest: no centroids");
  int best = 0;
  double best_d = (centroids.row(0).transpose() - z).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c).transpose() - z).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult kmeans_fit(const Matrix& z, int k, int restarts, uint64_t seed) {
  if (z.rows() == 0) throw std::invalid_argument("kmeans: empty input");
  if (k < 1 || k > z.rows()) throw std::invalid_argument("kmeans: k must be in [1, N]");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cur = lloyd(z, k, seed + static_cast<uint64_t>(r));
    if (!have || cur.inertia < best.inertia) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

KSweepResult sweep_k(const Matrix& z, const Graph& g, int k_min, int k_max, int restarts,
                     uint64_t seed) {
  if (k_min > k_max) throw std::invalid_argument("sweep_k: empty range");
  if (k_min < 2 || k_max > g.n_nodes - 1) {
    throw std::invalid_argument("sweep_k: range must stay within [2, N-1]");
  }
  KSweepResult sweep;
  bool have = false;
  double best_q = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    KMeansResult res = kmeans_fit(z, k, restarts, seed);
    const double q = modularity_score(g, to_assignment(res));
    sweep.table.push_back({k, q, res.inertia});
    if (!have || q > best_q) {
      best_q = q;
      sweep.best_k = k;
      sweep.best = std::move(res);
      have = true;
    }
  }
  return sweep;
}

CommunityAssignment to_assignment(const KMeansResult& result) {
  CommunityAssignment a;
  a.labels = result.labels;
  a.k = static_cast<int>(result.centroids.rows());
  a.centroids = result.centroids;
  return a;
}

}  // namespace modae
