#pragma once

#include <cstdint>
#include <limits>

namespace dynpath {

// Counter-keyed random stream. Each (seed, stream) pair yields an independent
// SplitMix64 sequence, so per-subject and per-replicate draws do not depend on
// the order in which subjects or replicates are processed.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0)
      : state_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + mix(stream + 0x3c6ef372fe94f82bULL) +
                   mix(domain ^ 0xa54ff53a5f1d36f1ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Stream domains keep the subject streams of different consumers apart.
namespace rng_domain {
inline constexpr std::uint64_t kSimulation = 1;
inline constexpr std::uint64_t kBootstrap = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kDerived = 4;
}  // namespace rng_domain

// Independent child seed number `index` of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return StreamRng(seed, index, rng_domain::kDerived)();
}

}  // namespace dynpath
