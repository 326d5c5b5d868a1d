#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace lem {

// Deterministic random source. All sampling is done through explicit helpers
// on raw 64-bit draws so identical seeds give identical streams on any
// platform; no std::*_distribution is involved anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 bits of entropy.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  // 1 with probability p.
  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  // Inverse-CDF draw from a probability vector that sums to 1 up to rounding.
  int categorical(std::span<const double> probs) {
    double u = uniform();
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      cum += probs[i];
      if (u < cum) return i;
    }
    // Rounding left cum slightly below 1; attribute the sliver to the last
    // index that carries mass.
    return last_positive;
  }

 private:
  std::mt19937_64 gen_;
};

// Seeded Fisher-Yates, used wherever training shuffles data.
inline void shuffle_indices(std::vector<std::uint32_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace lem
