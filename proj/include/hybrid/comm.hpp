#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hybrid/sim.hpp"

namespace hybrid::comm {

using Fields = std::vector<std::uint64_t>;
// Associative, commutative combination of two multi-field values.
using Combiner = std::function<Fields(const Fields&, const Fields&)>;

enum class AggregateOp { max, sum };

// All-reduce over the global network in a hypercube pattern on the first
// 2^floor(log2 n) IDs; the remaining nodes fold into (and back out of) their
// partner i - 2^floor(log2 n). Every node ends with the same value.
// Uses floor(log2 n) + 2 <= 2 ceil(log2 n) rounds (0 for n = 1); each node
// sends and receives one message per round.
// Throws ValidationError if a field is wider than one field slot or the
// message would not fit into gamma.
Fields aggregate_fields(sim::Network& net, std::vector<Fields> values, const Combiner& op);

std::uint64_t aggregate(sim::Network& net, const std::vector<std::uint64_t>& values,
                        AggregateOp op);

struct AggregateRun {
  std::uint64_t value = 0;
  std::size_t rounds = 0;
  sim::ExecutionTrace trace;
};

// Stand-alone aggregation on a fresh network.
AggregateRun aggregate(const graph::WeightedGraph& g, const std::vector<std::uint64_t>& values,
                       AggregateOp op, const sim::SimConfig& config);

struct Item {
  std::uint64_t key = 0;
  std::uint64_t value = 0;
  friend bool operator==(const Item&, const Item&) = default;
};

struct BroadcastResult {
  // known[v]: the items node v knows at the end, sorted by key.
  std::vector<std::vector<Item>> known;
  std::size_t rounds = 0;
};

// Makes ell distinct items (distinct keys) held by arbitrary nodes known to
// all. Push gossip along a public per-round random permutation, each node
// forwarding at most min(gamma / (2 ceil(log2 n)), gamma / item_bits) items per
// round, with a sum-aggregate of known counts checked every ceil(log2 n)
// gossip rounds. Throws RoundCapExceeded after 64 (ell + 1) ceil(log2 n)^2
// gossip rounds.
BroadcastResult broadcast_set(sim::Network& net, const std::vector<std::vector<Item>>& holders,
                              std::size_t ell, std::uint32_t item_bits);

}  // namespace hybrid::comm
