#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>

namespace hybrid {

// ceil(log2(x)) for x >= 1; 0 for x <= 1.
inline std::uint32_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(x - 1));
}

inline std::uint32_t floor_log2(std::uint64_t x) {
  return x == 0 ? 0 : static_cast<std::uint32_t>(std::bit_width(x) - 1);
}

// ceil(log2 n) clamped to >= 1, the "log n" of every budget formula.
inline std::uint32_t log_n(std::size_t n) {
  const auto l = ceil_log2(n);
  return l == 0 ? 1 : l;
}

// Width of one message field (an ID, weight or distance): the smallest b with
// 2^b >= n^kappa, at least 1.
inline std::uint32_t field_bits(std::size_t n, int kappa = 3) {
  unsigned __int128 bound = 1;
  for (int i = 0; i < kappa; ++i) bound *= n;
  std::uint32_t b = 1;
  while ((static_cast<unsigned __int128>(1) << b) < bound) ++b;
  return b;
}

}  // namespace hybrid
