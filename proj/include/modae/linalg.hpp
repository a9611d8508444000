#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace modae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64 finalizer; good avalanche, cheap.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

/// Seed for an independent random stream identified by (root, purpose, index).
/// Every random draw in the project flows from one root seed through here.
inline uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t index = 0) {
  return mix64(root ^ mix64(fnv1a(purpose)) ^ mix64(index + 0x51ed270b9f112a4bULL));
}

/// Deterministic RNG. Avoids std distributions so that identical seeds give
/// identical sequences on every implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), n > 0; rejection keeps it exactly uniform
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// k distinct elements of [0, n), k <= n, via partial Fisher-Yates.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + static_cast<int>(below(static_cast<uint64_t>(n - i)))]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace modae
