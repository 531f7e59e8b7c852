#pragma once

#include <cstdint>
#include <vector>

namespace pcis {

// Deterministic 64-bit generator used everywhere randomness is needed.
//
// The core step is splitmix64 (Steele et al., public domain): a 64-bit
// counter advanced by the golden-gamma constant and scrambled by two
// xor-shift multiplies. Streams are split by hashing (seed, stream) into the
// starting counter, so (seed, scene index) pairs give independent sequences.
//
// Everything here is integer arithmetic plus exact dyadic-float operations,
// so sequences are bit-identical across platforms. normal() is the
// Irwin-Hall sum of 12 uniforms (mean 0, variance 1, support [-6,6]), which
// keeps that guarantee; it is only used for sampling noise, not numerics.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    r.next_u64();  // decorrelate nearby (seed, stream) pairs
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) via rejection on the top range.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace pcis
