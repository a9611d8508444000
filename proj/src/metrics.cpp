#include "modae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace modae {

namespace {

int max_label_plus_one(const std::vector<int>& labels) {
  int k = 0;
  for (int c : labels) {
    if (c < 0) throw std::invalid_argument("negative community id");
    k = std::max(k, c + 1);
  }
  return k;
}

// Maximum-weight assignment on a square cost matrix (Kuhn-Munkres with
// potentials, O(n^3)). Returns the total matched weight.
double max_assignment(const std::vector<std::vector<double>>& weight) {
  const int n = static_cast<int>(weight.size());
  const double kInf = std::numeric_limits<double>::infinity();
  // Minimize negated weights; 1-based arrays per the classic formulation.
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = match[static_cast<size_t>(j0)], j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = -weight[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                     u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (match[static_cast<size_t>(j)] != 0) {
      total += weight[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)][static_cast<size_t>(j - 1)];
    }
  }
  return total;
}

}  // namespace

double nmi(const CommunityAssignment& a, const CommunityAssignment& b) {
  if (a.labels.size() != b.labels.size()) throw std::invalid_argument("nmi: partition sizes differ");
  const auto n = static_cast<double>(a.labels.size());
  if (a.labels.empty()) throw std::invalid_argument("nmi: empty partitions");

  const int ka = max_label_plus_one(a.labels);
  const int kb = max_label_plus_one(b.labels);
  std::vector<std::vector<double>> joint(static_cast<size_t>(ka),
                                         std::vector<double>(static_cast<size_t>(kb), 0.0));
  std::vector<double> pa(static_cast<size_t>(ka), 0.0), pb(static_cast<size_t>(kb), 0.0);
  for (size_t i = 0; i < a.labels.size(); ++i) {
    joint[static_cast<size_t>(a.labels[i])][static_cast<size_t>(b.labels[i])] += 1.0;
  }
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) pa[static_cast<size_t>(i)] += joint[static_cast<size_t>(i)][static_cast<size_t>(j)];
  for (int j = 0; j < kb; ++j)
    for (int i = 0; i < ka; ++i) pb[static_cast<size_t>(j)] += joint[static_cast<size_t>(i)][static_cast<size_t>(j)];

  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (int i = 0; i < ka; ++i) {
    const double p = pa[static_cast<size_t>(i)] / n;
    if (p > 0) ha -= p * std::log(p);
  }
  for (int j = 0; j < kb; ++j) {
    const double p = pb[static_cast<size_t>(j)] / n;
    if (p > 0) hb -= p * std::log(p);
  }
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double pij = joint[static_cast<size_t>(i)][static_cast<size_t>(j)] / n;
      if (pij > 0) {
        mi += pij * std::log(pij * n * n / (pa[static_cast<size_t>(i)] * pb[static_cast<size_t>(j)]));
      }
    }
  }
  const double denom = 0.5 * (ha + hb);
  if (denom == 0.0) return 1.0;  // both sides one cluster: identical partitions
  return std::clamp(mi / denom, 0.0, 1.0);
}

double accuracy(const CommunityAssignment& predicted, const CommunityAssignment& truth) {
  if (predicted.labels.size() != truth.labels.size()) {
    throw std::invalid_argument("accuracy: partition sizes differ");
  }
  if (predicted.labels.empty()) throw std::invalid_argument("accuracy: empty partitions");
  const int ka = max_label_plus_one(predicted.labels);
  const int kb = max_label_plus_one(truth.labels);
  if (ka > 20 || kb > 20) {
    throw std::invalid_argument("accuracy: community count exceeds the exact-matching guard (20)");
  }
  const int k = std::max(ka, kb);
  std::vector<std::vector<double>> confusion(static_cast<size_t>(k),
                                             std::vector<double>(static_cast<size_t>(k), 0.0));
  for (size_t i = 0; i < predicted.labels.size(); ++i) {
    confusion[static_cast<size_t>(predicted.labels[i])][static_cast<size_t>(truth.labels[i])] += 1.0;
  }
  return max_assignment(confusion) / static_cast<double>(predicted.labels.size());
}

}  // namespace modae
