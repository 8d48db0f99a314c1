#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lyapgap {

/// Counter-based random stream. The value sequence is a pure function of the
/// key triple (seed, stream, substream), so distinct streams can be consumed
/// in any order and on any thread with identical results; there is no global
/// state to share or lock.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0,
                     std::uint64_t substream = 0)
      : key_(mix(mix(mix(seed ^ 0x9E3779B97F4A7C15ull) + stream) + substream)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal deviate (Box-Muller; the paired value is cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lyapgap
