#pragma once

#include <cstdint>
#include <vector>

#include "hybrid/rng.hpp"

namespace hybrid::hash {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

struct HashFamilySpec {
  std::uint32_t domain_bits = 0;  // a
  std::uint32_t range_bits = 0;   // b
  std::uint32_t independence = 1;  // k
  std::uint64_t prime = kMersenne61;
};

// Validates k >= 1, p prime, p > 2^a and p > 2^b; throws ValidationError.
void validate(const HashFamilySpec& spec);

// Smallest prime strictly greater than 2^bits.
std::uint64_t smallest_prime_above_power(std::uint32_t bits);
bool is_prime(std::uint64_t x);

// Coefficients c_0..c_{k-1} of a degree-(k-1) polynomial over GF(p).
struct HashSeed {
  std::vector<std::uint64_t> coefficients;
};

HashSeed sample_seed(const HashFamilySpec& spec, Rng& rng);
// ceil(log2 p) bits per coefficient.
std::uint64_t seed_bits(const HashFamilySpec& spec);

// sum_i c_i key^i mod p.
std::uint64_t field_value(std::uint64_t prime, const HashSeed& seed, std::uint64_t key);

// field_value mod 2^b. The reduction skews each output value by at most
// 2^b / p relative to uniform.
std::uint64_t eval(const HashFamilySpec& spec, const HashSeed& seed, std::uint64_t key);

// field_value mod m, for ranges that are not powers of two.
std::uint64_t eval_range(const HashFamilySpec& spec, const HashSeed& seed, std::uint64_t key,
                         std::uint64_t m);

// 32-bit big-endian element count followed by the coefficients packed
// MSB-first in ceil(log2 p) bits each, zero-padded to a whole byte.
std::vector<std::uint8_t> serialize(const HashFamilySpec& spec, const HashSeed& seed);
HashSeed deserialize(const HashFamilySpec& spec, const std::vector<std::uint8_t>& bytes);

}  // namespace hybrid::hash
