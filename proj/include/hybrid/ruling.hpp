#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybrid/graph.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/rational.hpp"
#include "hybrid/sim.hpp"

namespace hybrid::ruling {

using graph::NodeId;

struct RulingSet {
  std::vector<NodeId> members;  // sorted
  std::size_t alpha = 1;
  std::size_t beta = 0;
};

// Deterministic ID-bit recursion: for each of the ceil(log2 n) bits, from the
// lowest, rulers whose bit is 0 flood their group tag for alpha - 1 hops and
// rulers of the same group whose bit is 1 withdraw when they hear it.
// Result: an (alpha, alpha * ceil(log2 n))-ruling set in
// ceil(log2 n) * (alpha - 1) local rounds.
RulingSet ruling_set(sim::Network& net, std::size_t alpha);
RulingSet ruling_set(const graph::WeightedGraph& g, std::size_t alpha,
                     const sim::SimConfig& config, sim::ExecutionTrace* trace = nullptr);

// Centralized check: members pairwise >= alpha hops apart and every node
// within beta hops of a member. On failure, *why (if given) says which.
bool verify_ruling_set(const graph::WeightedGraph& g, const std::vector<NodeId>& members,
                       std::size_t alpha, std::size_t beta, std::string* why = nullptr);

struct Clustering {
  std::vector<NodeId> ruler_of;
  std::vector<std::size_t> depth;  // hops to own ruler
  std::vector<NodeId> parent;      // next hop towards the ruler (self for rulers)
  std::map<NodeId, std::vector<NodeId>> members_of;  // ruler -> sorted members
  std::size_t max_depth = 0;
};

// Multi-source BFS over the local network: every node joins its hop-nearest
// ruler, ties to the smallest ruler ID, with the smallest-ID neighbor one
// layer closer as tree parent. Runs `rounds` BFS rounds (all nodes know the
// coverage bound); a max-aggregate then makes the deepest layer known.
Clustering cluster_nearest_ruler(sim::Network& net, const std::vector<NodeId>& rulers,
                                 std::size_t rounds);
// Centralized reference with the same tie rules.
Clustering cluster_nearest_ruler_oracle(const graph::WeightedGraph& g,
                                        const std::vector<NodeId>& rulers);

struct HelperFamily {
  std::vector<NodeId> targets;  // sorted, duplicates merged
  std::map<NodeId, std::vector<NodeId>> helpers;  // target -> sorted helper set
  std::map<NodeId, double> q_used;
  Rational nq_used;
  std::size_t alpha = 1;
  RulingSet rulers;
  Clustering clusters;
  // down_route[v][w]: child of v whose subtree contains w (cluster trees).
  std::vector<std::unordered_map<NodeId, NodeId>> down_route;
  std::size_t rounds = 0;
};

struct HelperParams {
  std::size_t k = 1;
  std::uint64_t gamma = 1;  // model gamma
  double c = 2.0;
};

// Ruling set with alpha = 2 ceil(NQ) + 1, nearest-ruler clusters, cluster
// gathering by convergecast and broadcast along the cluster trees, and
// independent coin flips: each v in C_r joins H_w for every target w in C_r
// with probability q = min(k / (gamma NQ) / |C_r| * 8 c ln n, 1).
HelperFamily build_helper_sets(sim::Network& net, const std::vector<NodeId>& targets,
                               const HelperParams& params, const Rational& nq);

// Targets sampled i.i.d. uniform with replacement; duplicates merged.
std::vector<NodeId> sample_iid_targets(std::size_t n, std::size_t count, std::uint64_t seed);

struct HelperCheck {
  bool size_ok = true;      // property (1)
  bool locality_ok = true;  // property (2)
  bool load_ok = true;      // property (3)
  std::size_t max_memberships = 0;
  std::size_t max_hops = 0;
  std::string detail;
};

// Centralized check of the helper-family properties: size lower bounds
// (deterministic when q = 1, the w.h.p. bound otherwise), every helper within
// 2 alpha ceil(log2 n) hops of its target, and no node in more than
// 16 c ln n sets.
HelperCheck verify_helpers(const graph::WeightedGraph& g, const HelperFamily& family,
                           const HelperParams& params);

nlohmann::json to_json(const HelperFamily& family);

}  // namespace hybrid::ruling
