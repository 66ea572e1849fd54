#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace unfis {

// Thin wrapper around mt19937_64 that avoids std::uniform_*_distribution,
// whose output is implementation-defined.  Everything here is reproducible
// bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).  Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();  // Box-Muller on the portable uniform stream

  template <typename T>
  void shuffle(std::vector<T>& values) {
    if (values.size() < 2) return;
    for (std::size_t i = values.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
      std::swap(values[i], values[j]);
    }
  }

  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace unfis
