#include "hybrid/kwise_hash.hpp"

#include "hybrid/bits.hpp"
#include "hybrid/errors.hpp"

namespace hybrid::hash {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  const u128 prod = static_cast<u128>(a) * b;
  if (p == kMersenne61) {
    std::uint64_t r = static_cast<std::uint64_t>(prod & kMersenne61) +
                      static_cast<std::uint64_t>(prod >> 61);
    if (r >= kMersenne61) r -= kMersenne61;
    return r;
  }
  return static_cast<std::uint64_t>(prod % p);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e != 0) {
    if (e & 1) r = static_cast<std::uint64_t>(static_cast<u128>(r) * a % p);
    a = static_cast<std::uint64_t>(static_cast<u128>(a) * a % p);
    e >>= 1;
  }
  return r;
}

std::uint32_t element_bits(std::uint64_t prime) { return ceil_log2(prime); }

}  // namespace

bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (const std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL,
                                31ULL, 37ULL}) {
    if (x % q == 0) return x == q;
  }
  // Deterministic Miller-Rabin for 64-bit inputs.
  std::uint64_t d = x - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (const std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL,
                                31ULL, 37ULL}) {
    std::uint64_t y = pow_mod(a, d, x);
    if (y == 1 || y == x - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      y = static_cast<std::uint64_t>(static_cast<u128>(y) * y % x);
      if (y == x - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t smallest_prime_above_power(std::uint32_t bits) {
  if (bits > 62) throw ValidationError("field too large");
  std::uint64_t x = (std::uint64_t{1} << bits) + 1;
  while (!is_prime(x)) ++x;
  return x;
}

void validate(const HashFamilySpec& spec) {
  if (spec.independence < 1) throw ValidationError("independence must be at least 1");
  if (!is_prime(spec.prime)) throw ValidationError("field size is not prime");
  const std::uint32_t wide = std::max(spec.domain_bits, spec.range_bits);
  if (wide >= 64 || spec.prime <= (std::uint64_t{1} << wide)) {
    throw ValidationError("field prime must exceed 2^max(a, b)");
  }
}

HashSeed sample_seed(const HashFamilySpec& spec, Rng& rng) {
  validate(spec);
  HashSeed seed;
  seed.coefficients.reserve(spec.independence);
  for (std::uint32_t i = 0; i < spec.independence; ++i) {
    seed.coefficients.push_back(rng.uniform(spec.prime));
  }
  return seed;
}

std::uint64_t seed_bits(const HashFamilySpec& spec) {
  return static_cast<std::uint64_t>(spec.independence) * element_bits(spec.prime);
}

std::uint64_t field_value(std::uint64_t prime, const HashSeed& seed, std::uint64_t key) {
  const std::uint64_t x = key % prime;
  std::uint64_t acc = 0;
  for (auto it = seed.coefficients.rbegin(); it != seed.coefficients.rend(); ++it) {
    acc = mul_mod(acc, x, prime) + *it;
    if (acc >= prime) acc -= prime;
  }
  return acc;
}

std::uint64_t eval(const HashFamilySpec& spec, const HashSeed& seed, std::uint64_t key) {
  if (spec.domain_bits < 64 && (key >> spec.domain_bits) != 0) {
    throw ValidationError("hash key outside the domain");
  }
  const std::uint64_t v = field_value(spec.prime, seed, key);
  return spec.range_bits >= 64 ? v : v & ((std::uint64_t{1} << spec.range_bits) - 1);
}

std::uint64_t eval_range(const HashFamilySpec& spec, const HashSeed& seed, std::uint64_t key,
                         std::uint64_t m) {
  if (m == 0) throw ValidationError("empty hash range");
  if (spec.domain_bits < 64 && (key >> spec.domain_bits) != 0) {
    throw ValidationError("hash key outside the domain");
  }
  return field_value(spec.prime, seed, key) % m;
}

std::vector<std::uint8_t> serialize(const HashFamilySpec& spec, const HashSeed& seed) {
  const std::uint32_t width = element_bits(spec.prime);
  const auto count = static_cast<std::uint32_t>(seed.coefficients.size());
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(count >> 24),
                                   static_cast<std::uint8_t>(count >> 16),
                                   static_cast<std::uint8_t>(count >> 8),
                                   static_cast<std::uint8_t>(count)};
  std::uint8_t current = 0;
  int filled = 0;
  for (const auto c : seed.coefficients) {
    for (int bit = static_cast<int>(width) - 1; bit >= 0; --bit) {
      current = static_cast<std::uint8_t>((current << 1) | ((c >> bit) & 1));
      if (++filled == 8) {
        out.push_back(current);
        current = 0;
        filled = 0;
      }
    }
  }
  if (filled != 0) out.push_back(static_cast<std::uint8_t>(current << (8 - filled)));
  return out;
}

HashSeed deserialize(const HashFamilySpec& spec, const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw ValidationError("truncated hash seed");
  const std::uint32_t count = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                              (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  const std::uint32_t width = element_bits(spec.prime);
  const std::uint64_t payload_bits = static_cast<std::uint64_t>(count) * width;
  if (bytes.size() != 4 + (payload_bits + 7) / 8) throw ValidationError("hash seed size mismatch");
  HashSeed seed;
  seed.coefficients.reserve(count);
  std::uint64_t pos = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint64_t c = 0;
    for (std::uint32_t b = 0; b < width; ++b, ++pos) {
      c = (c << 1) | ((bytes[4 + pos / 8] >> (7 - pos % 8)) & 1);
    }
    if (c >= spec.prime) throw ValidationError("hash seed element outside the field");
    seed.coefficients.push_back(c);
  }
  return seed;
}

}  // namespace hybrid::hash
