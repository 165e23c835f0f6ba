#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace dhsic {

// SplitMix64 finalizer, used to derive well-separated stream seeds from a
// master seed plus an index path.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t idx : path) s = mix64(s ^ mix64(idx + 0x632be59bd9b4e019ULL));
  return s;
}

// Deterministic random stream: a seeded mt19937_64 plus explicit transforms
// for bounded integers, unit uniforms and normals. The standard library's
// distribution objects are avoided because their algorithms are
// implementation-defined; everything here reproduces bit-for-bit across
// platforms for a given (master seed, path).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}
  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
      : gen_(derive_seed(master, path)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased draw from {0, ..., bound-1} by masked rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = ~0ULL >> std::countl_zero(bound - 1);
    std::uint64_t v;
    do {
      v = gen_() & mask;
    } while (v >= bound);
    return v;
  }

  // 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller on the uniform stream; one spare cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dhsic
