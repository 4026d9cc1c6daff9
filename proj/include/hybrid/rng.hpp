#pragma once

#include <cstdint>
#include <string_view>

namespace hybrid {

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit mix of a seed with a purpose label and up to two indices.
// Used to derive independent, reproducible streams (per node, per phase).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// xoshiro256** with explicit, platform-independent bounded sampling, so that
// traces are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform double in [0, 1) with 53 random bits.
  double unit();
  bool bernoulli(double p);

 private:
  std::uint64_t s_[4];
};

}  // namespace hybrid
