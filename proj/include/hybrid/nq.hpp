#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "hybrid/graph.hpp"
#include "hybrid/rational.hpp"
#include "hybrid/sim.hpp"

namespace hybrid::nq {

using graph::NodeId;

// max(k / (ball * gamma), d)
Rational quality_term(std::size_t k, std::uint64_t gamma, std::size_t ball, std::size_t d);

struct NodeQuality {
  Rational value;     // NQ(v)
  std::size_t d = 0;  // d_v, smallest minimizer
};

struct NQReport {
  Rational value;          // NQ(G, k, gamma)
  std::size_t d_star = 0;  // smallest optimizing radius
  std::vector<NodeQuality> per_node;
  NodeId argmax_node = 0;  // argmax of NQ(v), smallest ID on ties
  std::size_t k = 0;
  std::uint64_t gamma = 1;
  // Filled by the distributed computation only.
  std::size_t rounds_local = 0;
  std::size_t rounds_global = 0;
  std::size_t rounds_total = 0;
};

// Exhaustive evaluation over d in [1, D_G] (D_G >= 1 assumed for n = 1).
NQReport nq_oracle(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma);
NodeQuality nq_node_oracle(const graph::WeightedGraph& g, NodeId v, std::size_t k,
                           std::uint64_t gamma);
// Same minimization from a precomputed profile and diameter.
NodeQuality nq_from_profile(const graph::NeighborhoodProfile& p, std::size_t diameter,
                            std::size_t k, std::uint64_t gamma);

// Alternates one local ball-expansion round with a global max-aggregation of
// max(k / (N(v, d) gamma), d) and an "incomplete ball" flag, stopping at the
// first d' whose value does not improve at d' + 1 (or when every ball is the
// whole graph). Nodes then know their own NQ(v), d_v; a final aggregation
// publishes the argmax. gamma is the model's gamma; message capacity comes
// from the network's config.
NQReport nq_distributed(sim::Network& net, std::size_t k, std::uint64_t gamma);
NQReport nq_distributed(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma,
                        const sim::SimConfig& config, sim::ExecutionTrace* trace = nullptr);

nlohmann::json to_json(const NQReport& report);

}  // namespace hybrid::nq
