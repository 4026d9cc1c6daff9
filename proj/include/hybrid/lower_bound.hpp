#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hybrid/graph.hpp"
#include "hybrid/rational.hpp"
#include "hybrid/sim.hpp"

namespace hybrid::lower_bound {

using graph::NodeId;
using graph::Weight;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// A tree over a subset of a graph's nodes; vectors are indexed by graph node.
struct RootedTree {
  NodeId root = 0;
  std::size_t node_count = 0;
  std::vector<NodeId> parent;                 // kNoNode for the root and non-members
  std::vector<std::vector<NodeId>> children;  // ascending
  std::vector<std::size_t> subtree_size;      // t(u); 0 for non-members

  bool contains(NodeId u) const { return u < subtree_size.size() && subtree_size[u] > 0; }
  // p(u) = n - t(u)
  std::size_t complement(NodeId u) const { return node_count - subtree_size.at(u); }
};

// parent[u] == kNoNode marks a non-member unless u == root. Throws
// ValidationError if the parent links do not form a tree rooted at root.
RootedTree make_rooted_tree(NodeId root, const std::vector<NodeId>& parent);

// BFS tree of g rooted at root; each node's parent is its smallest-ID
// neighbour in the previous layer.
RootedTree bfs_tree(const graph::WeightedGraph& g, NodeId root);

// Walks down from subroot along the largest child (smallest ID on ties) until
// no child subtree exceeds half of subtree(subroot).
NodeId splitting_node(const RootedTree& tree, NodeId subroot);
inline NodeId splitting_node(const RootedTree& tree) { return splitting_node(tree, tree.root); }

// Sizes of the components of subtree(subroot) after deleting x.
std::vector<std::size_t> split_components(const RootedTree& tree, NodeId subroot, NodeId x);

// p(n) = coefficient * n^exponent, exponent >= 1, coefficient >= 1.
struct Polynomial {
  std::uint64_t coefficient = 1;
  unsigned exponent = 1;

  Weight at(std::size_t n) const;
};

struct HardInstance {
  graph::WeightedGraph graph;  // topology of the input with the hard weights
  NodeId v = 0;
  std::size_t d_v = 0;
  std::size_t n_prime = 0;  // |V \ B(v, d_v - 1)|
  std::vector<NodeId> v1;   // ascending
  std::vector<NodeId> v2;   // ascending
  std::vector<std::uint32_t> e_prime;  // edge indices, ascending
  std::vector<Weight> weights;         // indexed like graph.edges()
  Polynomial p;
  Weight threshold = 0;  // n * p(n)
  std::vector<std::pair<NodeId, NodeId>> pairing;  // i -> (v1[i], v2[i])
  std::size_t k_prime = 0;
  std::optional<NodeId> split;  // splitting node when the big-tree case applied
  RootedTree tree;              // T_v
};

// v = argmax NQ(v) (smallest ID on ties), d_v its optimal radius. Throws
// PreconditionError when n' < 8.
HardInstance build_hard_instance(const graph::WeightedGraph& g, std::size_t k,
                                 std::uint64_t gamma, Polynomial p = {});

// {v, d_v, V1, V2, E_prime, pairing, k_prime, p_poly} with external IDs.
nlohmann::json sidecar_json(const HardInstance& inst);

struct SourceEncoding {
  std::vector<std::uint8_t> bits;
  std::vector<NodeId> sources;  // sources[i] = v1[i] if bits[i] == 0 else v2[i]
};

SourceEncoding encode_sources(const HardInstance& inst, const std::vector<std::uint8_t>& x);

struct Decoded {
  std::vector<std::uint8_t> bits;
  std::vector<std::size_t> ambiguous;  // indices without a usable label
  bool ok() const { return ambiguous.empty(); }
};

// labels: source -> d~(source, v). Index i is read from the label of whichever
// node of pair i is present: 0 if d~ < n p(n), 1 if above; a label equal to
// the threshold, or a pair with zero or two labels, is ambiguous.
Decoded decode_from_distances(const std::map<NodeId, Weight>& labels, const HardInstance& inst);

struct LowerBoundValue {
  NodeId v = 0;
  std::size_t d_v = 0;
  std::size_t ball = 0;    // N(v, d_v - 1)
  Rational volume_term;    // ceil(k/16) / (N gamma)
  Rational distance_term;  // (d_v - 1)/2 - 1
  Rational value;          // min of both, 0 in the trivial regime
  Rational chain;          // max(k / (N(v, d_v) gamma), d_v) - 1 = NQ - 1
  bool trivial = false;    // distance term <= 0, i.e. d_v <= 3
};

LowerBoundValue lb_value(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma);

// Constants of the chain value >= min(a, b) * (NQ - 1) for d_v >= 4:
// ceil(k/16)/(N gamma) >= a k/(N gamma) and (d_v - 3)/2 >= b d_v.
inline const Rational kChainA{1, 16};
inline const Rational kChainB{1, 8};

struct AuditReport {
  std::vector<NodeId> ball;  // B(v, h - 1), h = d_v - 1
  std::size_t h = 0;
  std::size_t runs = 0;
  std::vector<std::uint64_t> bits_per_run;
  Rational mean_bits;
  Rational success_rate;  // p-hat
  std::size_t entropy = 0;  // H(X) = k'
  Rational transcript_bound;  // p-hat k' - 1
  Rational round_bound;       // min((p-hat k' - 1)/(N gamma), h/2 - 1)
  bool vacuous = false;       // h/2 - 1 <= 0
  bool holds = false;         // mean_bits >= p-hat k' - 1
};

std::vector<NodeId> audit_ball(const HardInstance& inst);
std::uint64_t bits_into_ball(const sim::ExecutionTrace& trace, const HardInstance& inst);

// gamma_bits is the per-round global cap the runs used.
AuditReport audit_information_flow(const std::vector<std::uint64_t>& bits_per_run,
                                   const std::vector<bool>& success, const HardInstance& inst,
                                   std::uint64_t gamma_bits);
AuditReport audit_information_flow(const std::vector<sim::ExecutionTrace>& traces,
                                   const std::vector<bool>& success, const HardInstance& inst,
                                   std::uint64_t gamma_bits);

nlohmann::json to_json(const AuditReport& report);

struct DecodeTrial {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> decoded;
  bool success = false;
  std::uint64_t bits_into_ball = 0;
  std::size_t rounds = 0;
};

struct DecodeExperiment {
  std::vector<DecodeTrial> trials;
  AuditReport audit;
};

// Per run: uniform X, encode, exact-mode (k', 1)-SP with target v, decode at
// v, and count the delivered global bits entering the audit ball.
DecodeExperiment run_decode_experiment(const HardInstance& inst, std::size_t runs,
                                       std::uint64_t gamma, const sim::SimConfig& config);

}  // namespace hybrid::lower_bound
