#pragma once

// Brute-force references used by the unit tests. They share nothing with the
// library beyond the graph container.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "hybrid/graph.hpp"
#include "hybrid/rational.hpp"

namespace testsupport {

using hybrid::Rational;
using hybrid::graph::NodeId;
using hybrid::graph::Weight;
using hybrid::graph::WeightedGraph;

inline constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// All-pairs hop distances by Floyd-Warshall.
inline std::vector<std::vector<std::int64_t>> floyd_hops(const WeightedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, kInf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
  return d;
}

inline std::vector<std::vector<std::int64_t>> floyd_weights(const WeightedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, kInf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (const auto& e : g.edges()) {
    d[e.u][e.v] = std::min<std::int64_t>(d[e.u][e.v], e.w);
    d[e.v][e.u] = d[e.u][e.v];
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
  return d;
}

// |B(v, d)| counted directly from the hop matrix.
inline std::size_t ball(const std::vector<std::vector<std::int64_t>>& hops, NodeId v,
                        std::int64_t d) {
  return static_cast<std::size_t>(
      std::count_if(hops[v].begin(), hops[v].end(), [&](std::int64_t x) { return x <= d; }));
}

// NQ(v) and NQ(G) by enumeration over d in [1, D_G].
struct BruteNQ {
  std::vector<Rational> per_node;
  std::vector<std::size_t> d_of;
  Rational value;
};

inline BruteNQ brute_nq(const WeightedGraph& g, std::size_t k, std::uint64_t gamma) {
  const auto hops = floyd_hops(g);
  const std::size_t n = g.node_count();
  std::int64_t diam = 0;
  for (const auto& row : hops)
    for (const auto x : row) diam = std::max(diam, x);
  diam = std::max<std::int64_t>(diam, 1);
  BruteNQ out;
  out.per_node.assign(n, Rational(0));
  out.d_of.assign(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    bool first = true;
    for (std::int64_t d = 1; d <= diam; ++d) {
      const Rational term =
          hybrid::max(Rational(static_cast<std::int64_t>(k),
                               static_cast<std::int64_t>(ball(hops, v, d) * gamma)),
                      Rational(d));
      if (first || term < out.per_node[v]) {
        out.per_node[v] = term;
        out.d_of[v] = static_cast<std::size_t>(d);
        first = false;
      }
    }
    out.value = hybrid::max(out.value, out.per_node[v]);
  }
  return out;
}

}  // namespace testsupport
