#pragma once

#include <cstdint>
#include <random>

namespace cgmc {

// splitmix64 step, used to decorrelate seeds of parallel chains and to mix
// hash words. Public-domain construction (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-chain random stream. mt19937_64 core with explicit, portable
// conversions so the same seed reproduces the same chain on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Spread low-entropy seeds before handing them to the engine.
    std::uint64_t s = seed;
    gen_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection,
  // unbiased for any n.
  std::uint64_t uniform_below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int index_below(int n) { return static_cast<int>(uniform_below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform sign in {-1, +1}.
  int spin_sign() { return (next_u64() & 1u) ? +1 : -1; }

 private:
  std::mt19937_64 gen_;
};

// Order-sensitive FNV-1a over a list of 64-bit words, then a splitmix finish.
// Used to derive chain seeds from (seed_base, h, method, replicate) so sweep
// tasks get stable, independent streams.
inline std::uint64_t stable_hash(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : words) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (w >> (8 * byte)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return splitmix64(h);
}

inline std::uint64_t double_bits(double x) {
  std::uint64_t out;
  static_assert(sizeof(out) == sizeof(x));
  __builtin_memcpy(&out, &x, sizeof(out));
  return out;
}

}  // namespace cgmc
