#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctret {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Counter-based stream derivation: (base seed, stream id, index) -> engine seed.
// Trials/runs get independent streams regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t h = mix64(base + 0x9e3779b97f4a7c15ull);
  h = mix64(h ^ (stream + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ (index + 0x9e3779b97f4a7c15ull));
  return h;
}

// mt19937_64 with hand-rolled uniform/normal transforms so draw sequences are
// identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Marsaglia polar method with cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ctret
