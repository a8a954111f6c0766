#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace ipmsrl {

// splitmix64 finalizer, used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for a named stream of one episode:
//   mix64(mix64(mix64(seed) ^ episode_index) ^ fnv1a64(tag))
constexpr std::uint64_t derive_stream_seed(std::uint64_t seed,
                                           std::uint64_t episode_index,
                                           std::string_view tag) {
  return mix64(mix64(mix64(seed) ^ episode_index) ^ fnv1a64(tag));
}

// Portable random stream. The engine output is fixed by the standard; the
// draw routines below are written out so results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Uniform integer in [0, n). Rejection sampling removes modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    if (n == 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Independent named streams for one episode.
struct RngStreams {
  Rng attacker;
  Rng alerts;
  Rng policy;

  RngStreams(std::uint64_t seed, std::uint64_t episode_index)
      : attacker(derive_stream_seed(seed, episode_index, "attacker")),
        alerts(derive_stream_seed(seed, episode_index, "alerts")),
        policy(derive_stream_seed(seed, episode_index, "policy")) {}
};

}  // namespace ipmsrl
