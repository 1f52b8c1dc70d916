#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace stableband {

/// Deterministic splitmix64 stream with cheap forking.
///
/// All randomness in the library flows through this type so that results are
/// reproducible across platforms and standard-library versions (the std::
/// distributions are implementation-defined). `fork` derives an independent
/// stream from a label; batch kernels fork one stream per element, which makes
/// their output independent of thread count and iteration order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform on the open interval (0,1): 53-bit mantissa, half-ulp offset,
  /// so log() and tan() of the result are always finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential() { return -std::log(uniform01()); }

  /// Uniform index in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Independent child stream. Forking with distinct labels from the same
  /// parent yields decorrelated streams; the parent is not advanced.
  Rng fork(std::uint64_t label) const {
    return Rng(mix(state_ ^ mix(label + 0x632BE59BD9B4E019ull)));
  }

  Rng fork(std::string_view label) const { return fork(fnv1a64(label)); }

  std::uint64_t state() const { return state_; }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    return h;
  }

 private:
  std::uint64_t state_;
};

}  // namespace stableband
