#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lpoco {

/// Stream tags used when deriving substreams. Keeping them in one place keeps the
/// derivations of different modules from colliding.
namespace stream {
inline constexpr std::uint64_t kProblem = 0x70726f62;     // instance generation
inline constexpr std::uint64_t kInitDirection = 0x696e6974;
inline constexpr std::uint64_t kLevelDirection = 0x6c766c64;
inline constexpr std::uint64_t kZoDirection = 0x7a6f6472;
inline constexpr std::uint64_t kNoise = 0x6e6f6973;
inline constexpr std::uint64_t kTrial = 0x7472696c;
inline constexpr std::uint64_t kAlgorithm = 0x616c676f;
}  // namespace stream

/// Seeded pseudo-random stream.
///
/// Uniform doubles are formed from the top 53 bits of a 64-bit Mersenne Twister draw, so a
/// given seed produces the same sequence on every platform. Substreams are derived by hashing
/// (seed, keys...) with splitmix64; results therefore never depend on the order in which
/// independent substreams are consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(seed, keys));
  }

  static std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lpoco
