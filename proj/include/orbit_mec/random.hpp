#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace orbit_mec {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`: splitmix64(master ^ splitmix64(index + 1)).
/// Replication i uses derive_seed(master, i); sub-streams (topology, draws,
/// exploration, evaluation) re-derive from that with fixed small indices.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Named sub-stream indices.
enum class Stream : std::uint64_t {
  topology = 1,
  draws = 2,
  exploration = 3,
  evaluation = 4,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream s) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(s) + 0x1000);
}

/// mt19937_64 with library-independent bounded draws, so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace orbit_mec
