#pragma once

#include <cstdint>
#include <random>

namespace codicon {

// Seeded generator with a platform-independent uniform mapping, so a
// (seed, config) pair yields the same stream under any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

// Independent stream seed for (master, stream id); splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace codicon
