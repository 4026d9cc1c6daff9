#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hybrid::graph {

// Nodes are stored as contiguous 0-based indices. The externally visible
// identifier (the ID in [n] every node owns) is index + 1; see external_id().
using NodeId = std::uint32_t;
using Weight = std::int64_t;

inline constexpr Weight kInfinity = std::numeric_limits<Weight>::max();
inline constexpr int kDefaultKappa = 3;

inline std::uint64_t external_id(NodeId v) { return static_cast<std::uint64_t>(v) + 1; }

struct Edge {
  NodeId u;
  NodeId v;
  Weight w;
};

struct Arc {
  NodeId to;
  Weight w;
  std::uint32_t edge;
};

// n^kappa, saturating at INT64_MAX.
Weight poly_bound(std::size_t n, int kappa);

// Undirected, connected graph with integer weights in [1, W], W <= n^kappa.
// Immutable after construction; the constructor enforces every invariant.
class WeightedGraph {
 public:
  WeightedGraph(std::size_t n, std::vector<Edge> edges, Weight max_weight,
                int kappa = kDefaultKappa);

  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  Weight max_weight() const { return max_weight_; }
  int kappa() const { return kappa_; }

  std::span<const Arc> neighbors(NodeId v) const { return adj_.at(v); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<std::uint32_t> edge_between(NodeId u, NodeId v) const;
  bool adjacent(NodeId u, NodeId v) const { return edge_between(u, v).has_value(); }

  // Original labels from an ingested file (label of node i); defaults to i + 1.
  const std::vector<std::int64_t>& labels() const { return labels_; }
  void set_labels(std::vector<std::int64_t> labels);

  // Same topology, new weights (indexed like edges()).
  WeightedGraph with_weights(const std::vector<Weight>& weights, Weight max_weight,
                             int kappa) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::int64_t> labels_;
  Weight max_weight_;
  int kappa_;
};

// Edge-list text: first line "n m W", then m lines "u v w" (1-based).
// Lines starting with '#' are comments. Labels that are not exactly 1..n are
// re-indexed in ascending order and kept in labels().
WeightedGraph parse_edge_list(std::string_view text, int kappa = kDefaultKappa);
std::string format_edge_list(const WeightedGraph& g);
WeightedGraph read_edge_list_file(const std::string& path, int kappa = kDefaultKappa);
void write_edge_list_file(const WeightedGraph& g, const std::string& path);

enum class GraphKind {
  path,
  cycle,
  star,
  grid,
  complete,
  erdos_renyi,
  barbell,
  lollipop,
  binary_tree,
  random_tree
};

std::optional<GraphKind> parse_graph_kind(std::string_view name);
std::string_view to_string(GraphKind kind);

struct GenParams {
  std::size_t n = 0;
  std::size_t rows = 0;  // grid
  std::size_t cols = 0;  // grid
  std::size_t clique = 0;  // barbell (each bell) and lollipop
  double edge_probability = 0.0;  // erdos_renyi
  Weight max_edge_weight = 1;  // > 1 draws weights uniformly from [1, max_edge_weight]
  std::optional<Weight> max_weight;  // declared W; defaults to n^2 + n
};

// Deterministic given (kind, params, seed).
WeightedGraph generate(GraphKind kind, const GenParams& params, std::uint64_t seed);

// sizes[d] = |B(v, d)| for d = 0..ecc(v).
struct NeighborhoodProfile {
  NodeId node;
  std::vector<std::size_t> sizes;

  // |B(v, d)| for any d >= 0 (saturates at n past the eccentricity).
  std::size_t at(std::size_t d) const { return d < sizes.size() ? sizes[d] : sizes.back(); }
};

std::vector<std::uint32_t> hop_distances(const WeightedGraph& g, NodeId source);
NeighborhoodProfile neighborhood_profile(const WeightedGraph& g, NodeId v);
std::vector<NeighborhoodProfile> all_neighborhood_profiles(const WeightedGraph& g);

// N(d) = min_v |B(v, d)| for d = 0..D_G (index 0 is always 1).
std::vector<std::size_t> min_neighborhood_profile(const WeightedGraph& g);

std::size_t hop_diameter(const WeightedGraph& g);

struct DistanceLabels {
  NodeId source;
  std::vector<Weight> dist;  // kInfinity where unreachable within the hop limit
  std::optional<std::size_t> hop_limit;
};

// Weighted distances from source; with a hop limit h, d_{G,h}.
DistanceLabels exact_distances(const WeightedGraph& g, NodeId source,
                               std::optional<std::size_t> hop_limit = std::nullopt);

}  // namespace hybrid::graph
