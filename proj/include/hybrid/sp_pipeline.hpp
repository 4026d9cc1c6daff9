#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hybrid/graph.hpp"
#include "hybrid/rational.hpp"
#include "hybrid/routing.hpp"
#include "hybrid/sim.hpp"

namespace hybrid::sp {

using graph::NodeId;
using graph::Weight;

enum class DistanceMode { exact, skeleton };

struct SPInstance {
  std::vector<NodeId> sources;
  std::vector<NodeId> targets;
  Rational eps{1, 10};  // recorded; exact mode meets any eps > 0
  routing::TargetMode mode = routing::TargetMode::fixed;
};

// Draws ell i.i.d. uniform targets (duplicates merged) from the seed.
SPInstance make_iid_instance(std::size_t n, std::vector<NodeId> sources, std::size_t ell,
                             std::uint64_t seed);

// dist[v][r]: distance from roots[r] as known at node v after the run.
struct MultiSourceDistances {
  std::vector<std::vector<Weight>> dist;
  std::size_t rounds = 0;
};

// Distributed Bellman-Ford over the local network from every root at once.
// After each local round a sum-aggregate of "changed" flags decides whether
// to continue, so it stops one round after the distances settle.
MultiSourceDistances sssp_exact_reference(sim::Network& net, const std::vector<NodeId>& roots);

struct SkeletonEdge {
  NodeId u;
  NodeId v;
  Weight w;
};

struct SkeletonGraph {
  std::vector<NodeId> nodes;  // sampled, ascending
  std::vector<SkeletonEdge> edges;
  double x = 1.0;
  std::size_t h = 0;
  // hop_limited[v]: (sampled node, d_h) pairs known at v after the exploration.
  std::vector<std::vector<std::pair<NodeId, Weight>>> hop_limited;
  std::size_t rounds = 0;
};

// Each node joins with probability 1/x (nodes in `forced` always join);
// h = ceil(c x ln n) rounds of hop-limited Bellman-Ford from all sampled nodes
// give the virtual edges, whose count is aggregated before the edge set is
// broadcast to everyone.
SkeletonGraph skeleton_build(sim::Network& net, double x, const std::vector<NodeId>& forced = {});

// All-pairs distances inside the skeleton; result[a][b] indexes S.nodes.
std::vector<std::vector<Weight>> skeleton_distances(const SkeletonGraph& s);

struct SPResult {
  // (target, source, d~), ascending by target then source.
  std::vector<std::tuple<NodeId, NodeId, Weight>> labels;
  Rational stretch{1};
  std::size_t rounds_phase_a = 0;
  std::size_t rounds_phase_b = 0;
  routing::DeliveryReport delivery;
  nq::NQReport nq;
};

struct SPOptions {
  std::uint64_t gamma = 1;  // model gamma
  DistanceMode mode = DistanceMode::exact;
  double skeleton_x = 4.0;
};

// Phase A (distances from the targets to every node, on its own network)
// followed by phase B (token routing of d~(s, t) to every target).
// trace_a / trace_b may be null.
SPResult solve_k_ell_sp(const graph::WeightedGraph& g, const SPInstance& instance,
                        const SPOptions& options, const sim::SimConfig& config,
                        sim::ExecutionTrace* trace_a = nullptr,
                        sim::ExecutionTrace* trace_b = nullptr);

// max over labels of d~ / d, exactly; ValidationError if any d~ < d or a
// (source, target) pair has no label.
Rational stretch_of(const graph::WeightedGraph& g, const SPInstance& instance,
                    const std::vector<std::tuple<NodeId, NodeId, Weight>>& labels);

nlohmann::json to_json(const SPResult& result);

}  // namespace hybrid::sp
