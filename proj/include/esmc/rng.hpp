#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace esmc {

// Deterministic random stream. std::mt19937_64 gives a portable bit
// stream; the floating-point draws are implemented here instead of with
// std::*_distribution so the stream is identical across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method.
  double normal();

  // Uniform integer in [0, bound), unbiased by rejection.
  std::uint64_t uniform_int(std::uint64_t bound);

  // k distinct indices from {0, ..., n-1}, returned sorted ascending.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace esmc
