#pragma once

#include <cstdint>
#include <vector>

#include "polya/series.hpp"

namespace testutil {

// Deterministic LCG so property tests are reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed) {}
  uint64_t next() {
    s_ = s_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return s_ >> 33;
  }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
  }

 private:
  uint64_t s_;
};

inline polya::Series random_series(Rng& rng, int order, int max_num = 4, int max_den = 3) {
  polya::Series s(order);
  for (int n = 1; n <= order; ++n) {
    int num = rng.range(0, max_num);
    int den = rng.range(1, max_den);
    s.set(n, polya::rat(num, den));
  }
  return s;
}

// Catalan numbers via the ballot recurrence: c(1)=1, c(n+1)=sum c(k)c(n+1-k).
// Independent of the library's series arithmetic.
inline std::vector<polya::Rat> catalan_oracle(int n) {
  std::vector<polya::Rat> c(static_cast<size_t>(n) + 1);
  c[1] = 1;
  for (int m = 2; m <= n; ++m) {
    polya::Rat acc = 0;
    for (int k = 1; k < m; ++k) acc += c[static_cast<size_t>(k)] * c[static_cast<size_t>(m - k)];
    c[static_cast<size_t>(m)] = acc;
  }
  return c;
}

// Rooted-tree counts via the Euler-product recurrence:
// t(1)=1, n*t(n+1) = sum_{k=1..n} (sum_{d|k} d*t(d)) * t(n-k+1).
inline std::vector<polya::Rat> rooted_tree_oracle(int n) {
  std::vector<polya::Rat> t(static_cast<size_t>(n) + 1);
  std::vector<polya::Rat> sigma(static_cast<size_t>(n) + 1);  // sum_{d|k} d*t(d)
  if (n >= 1) t[1] = 1;
  for (int m = 1; m < n; ++m) {
    for (int mult = m; mult <= n; mult += m) sigma[static_cast<size_t>(mult)] += polya::Rat(m) * t[static_cast<size_t>(m)];
    polya::Rat acc = 0;
    for (int k = 1; k <= m; ++k) acc += sigma[static_cast<size_t>(k)] * t[static_cast<size_t>(m - k + 1)];
    t[static_cast<size_t>(m + 1)] = acc / m;
  }
  return t;
}

}  // namespace testutil
