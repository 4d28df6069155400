#ifndef LIEJET_RNG_HPP
#define LIEJET_RNG_HPP

#include <cstdint>

namespace liejet {

/// Deterministic splitmix64 stream. Reports depend on sampled points, so the
/// mapping from seed to doubles must be identical across platforms; the
/// standard library distributions are not, this is.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform integer in [0, n).
  int next_below(int n) { return n <= 1 ? 0 : int(next_u64() % std::uint64_t(n)); }

private:
  std::uint64_t state_;
};

} // namespace liejet

#endif
