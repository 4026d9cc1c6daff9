#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybrid/graph.hpp"
#include "hybrid/kwise_hash.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/ruling.hpp"
#include "hybrid/sim.hpp"

namespace hybrid::routing {

using graph::NodeId;

// Constant of the max-load bounds used by the statistical checks:
// X_u <= a * ell * ln n and Y_i <= a * ln n with a = 1 + 3c.
double load_constant(double c);

// b = max(1, floor(gamma_bits / (8 ceil(log2 n)^2))).
std::size_t batch_size(std::uint64_t gamma_bits, std::size_t n);

struct Token {
  NodeId source = 0;
  NodeId target = 0;
  std::uint64_t payload = 0;
};

enum class TargetMode { fixed, iid };

struct RoutingPlan {
  std::vector<NodeId> targets;  // t_1..t_ell, ascending ID
  std::size_t k = 0;
  std::size_t batch = 1;
  std::uint32_t pack_shift = 0;  // pack(i, j) = i * 2^pack_shift + j
  hash::HashFamilySpec h_spec;   // keys pack(i, j) -> nodes
  hash::HashFamilySpec g_spec;   // IDs -> [k]
  hash::HashSeed h_seed;
  hash::HashSeed g_seed;
  // helpers_of[j]: nodes serving t_j (the target itself when H is empty).
  std::vector<std::vector<NodeId>> helpers_of;
  std::size_t cluster_depth = 0;
  // Cluster trees used to carry collected tokens to their target.
  std::vector<NodeId> tree_parent;
  std::vector<std::unordered_map<NodeId, NodeId>> down_route;
  std::size_t rounds = 0;

  std::uint64_t pack(std::uint64_t i, std::uint64_t j) const { return (i << pack_shift) + j; }
  // g(ID(s)) in [k].
  std::uint64_t bin_of(NodeId source) const;
  // h(pack(i, j)) in [n].
  NodeId intermediate(std::uint64_t i, std::uint64_t j, std::size_t n) const;
  // Tasks (i, j) of helper position `pos` among helpers_of[j]: contiguous block.
  std::pair<std::size_t, std::size_t> task_block(std::size_t j, std::size_t pos) const;
};

struct DeliveryReport {
  // target -> (source, payload), ascending source.
  std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> delivered;
  std::size_t delivered_count = 0;
  std::size_t rounds_local = 0;
  std::size_t rounds_global = 0;
  std::size_t rounds_total = 0;
  std::uint64_t max_rx_bits = 0;
  std::size_t max_rx_messages = 0;  // phases 1-3, any node, any round
  std::size_t xu_max = 0;
  std::size_t yi_max = 0;
  std::size_t batch = 1;
  bool audit_exempt = false;        // gamma below 8 ceil(log2 n)^2 bits
  bool outside_hypothesis = false;  // iid targets with ell > NQ, or too many fixed targets
  std::uint64_t seed = 0;
};

// Aggregates k and ell, broadcasts target IDs and hash seeds drawn by node 1,
// and derives every helper's task block from the helper family.
RoutingPlan plan_routing(sim::Network& net, const std::vector<NodeId>& sources,
                         const std::vector<NodeId>& targets, const ruling::HelperFamily& helpers);

// Four phases: sources push tokens to hashed intermediates in batches of b;
// helpers request their tasks (at most b outstanding); intermediates answer
// one token per request per round, flagging the last (or an empty answer);
// helpers forward collected tokens to their target along the cluster tree.
// Phase changes are barriers (sum-aggregates of "busy" flags). Throws
// DeliveryError if a token is missing at its target.
DeliveryReport route_tokens(sim::Network& net, const RoutingPlan& plan,
                            const std::vector<Token>& tokens);

struct RouteRequest {
  std::vector<NodeId> sources;
  std::vector<NodeId> targets;
  std::vector<Token> tokens;  // one per (source, target)
  std::uint64_t gamma = 1;    // model gamma
  TargetMode mode = TargetMode::fixed;
  double c = 2.0;
};

struct RouteRun {
  nq::NQReport nq;
  ruling::HelperFamily helpers;
  RoutingPlan plan;
  DeliveryReport report;
};

// NQ computation, helper sets, plan and token routing on one network.
RouteRun run_routing(sim::Network& net, const RouteRequest& request);

// Checks the hypothesis on the target set: iid targets need ell <= NQ, fixed
// targets ell <= ceil(log2 n)^2.
bool within_hypothesis(TargetMode mode, std::size_t ell, const Rational& nq, std::size_t n);

nlohmann::json to_json(const DeliveryReport& report);

}  // namespace hybrid::routing
