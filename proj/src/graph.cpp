#include "hybrid/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "hybrid/errors.hpp"
#include "hybrid/rng.hpp"

namespace hybrid::graph {

Weight poly_bound(std::size_t n, int kappa) {
  __int128 r = 1;
  for (int i = 0; i < kappa; ++i) {
    r *= static_cast<__int128>(n);
    if (r > static_cast<__int128>(INT64_MAX)) return INT64_MAX;
  }
  return static_cast<Weight>(r);
}

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges, Weight max_weight,
                             int kappa)
    : edges_(std::move(edges)), adj_(n), max_weight_(max_weight), kappa_(kappa) {
  if (n == 0) throw ValidationError("graph must have at least one node");
  if (n > std::numeric_limits<NodeId>::max() / 2) throw ValidationError("too many nodes");
  if (max_weight < 1) throw ValidationError("maximum weight W must be at least 1");
  if (max_weight > poly_bound(n, kappa)) {
    throw ValidationError("maximum weight W=" + std::to_string(max_weight) + " exceeds n^" +
                          std::to_string(kappa));
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.u >= n || e.v >= n) throw ValidationError("edge endpoint out of range");
    if (e.u == e.v) {
      throw ValidationError("self-loop at node " + std::to_string(external_id(e.u)));
    }
    if (e.w < 1 || e.w > max_weight) {
      throw ValidationError("edge weight " + std::to_string(e.w) + " outside [1, " +
                            std::to_string(max_weight) + "]");
    }
    const std::uint64_t a = std::min(e.u, e.v);
    const std::uint64_t b = std::max(e.u, e.v);
    if (!seen.insert(a * n + b).second) {
      throw ValidationError("duplicate edge {" + std::to_string(a + 1) + ", " +
                            std::to_string(b + 1) + "}");
    }
    adj_[e.u].push_back({e.v, e.w, i});
    adj_[e.v].push_back({e.u, e.w, i});
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end(), [](const Arc& x, const Arc& y) { return x.to < y.to; });
  }
  const auto dist = hop_distances(*this, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (dist[v] == std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("graph is disconnected (node " + std::to_string(v + 1) +
                            " unreachable from node 1)");
    }
  }
  labels_.resize(n);
  for (std::size_t v = 0; v < n; ++v) labels_[v] = static_cast<std::int64_t>(v + 1);
}

std::optional<std::uint32_t> WeightedGraph::edge_between(NodeId u, NodeId v) const {
  const auto& list = adj_.at(u);
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Arc& a, NodeId x) { return a.to < x; });
  if (it != list.end() && it->to == v) return it->edge;
  return std::nullopt;
}

void WeightedGraph::set_labels(std::vector<std::int64_t> labels) {
  if (labels.size() != node_count()) throw ValidationError("label count mismatch");
  labels_ = std::move(labels);
}

WeightedGraph WeightedGraph::with_weights(const std::vector<Weight>& weights, Weight max_weight,
                                          int kappa) const {
  if (weights.size() != edges_.size()) throw ValidationError("weight count mismatch");
  std::vector<Edge> e = edges_;
  for (std::size_t i = 0; i < e.size(); ++i) e[i].w = weights[i];
  WeightedGraph g(node_count(), std::move(e), max_weight, kappa);
  g.labels_ = labels_;
  return g;
}

namespace {

bool skip_line(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

template <typename T>
T read_field(std::istringstream& in, std::size_t line_no, const char* name) {
  T value{};
  if (!(in >> value)) throw ParseError(line_no, std::string("expected integer ") + name);
  return value;
}

void expect_end(std::istringstream& in, std::size_t line_no) {
  std::string rest;
  if (in >> rest) throw ParseError(line_no, "unexpected token '" + rest + "'");
}

}  // namespace

WeightedGraph parse_edge_list(std::string_view text, int kappa) {
  std::istringstream stream{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  long long n = 0, m = 0;
  Weight w_max = 0;
  struct RawEdge {
    std::int64_t u, v;
    Weight w;
    std::size_t line;
  };
  std::vector<RawEdge> raw;
  while (std::getline(stream, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::istringstream in(line);
    if (!have_header) {
      n = read_field<long long>(in, line_no, "n");
      m = read_field<long long>(in, line_no, "m");
      w_max = read_field<Weight>(in, line_no, "W");
      expect_end(in, line_no);
      if (n <= 0) throw ParseError(line_no, "n must be positive");
      if (m < 0) throw ParseError(line_no, "m must be non-negative");
      have_header = true;
      continue;
    }
    RawEdge e{};
    e.u = read_field<std::int64_t>(in, line_no, "u");
    e.v = read_field<std::int64_t>(in, line_no, "v");
    e.w = read_field<Weight>(in, line_no, "w");
    e.line = line_no;
    expect_end(in, line_no);
    raw.push_back(e);
  }
  if (!have_header) throw ParseError(line_no, "missing header 'n m W'");
  if (static_cast<long long>(raw.size()) != m) {
    throw ParseError(line_no, "header declares " + std::to_string(m) + " edges, found " +
                                  std::to_string(raw.size()));
  }

  std::map<std::int64_t, NodeId> index;
  for (const auto& e : raw) {
    index.emplace(e.u, 0);
    index.emplace(e.v, 0);
  }
  if (static_cast<long long>(index.size()) > n) {
    throw ParseError(raw.back().line, "more distinct node labels than n=" + std::to_string(n));
  }
  bool identity = true;
  for (const auto& [label, _] : index) {
    if (label < 1 || label > n) identity = false;
  }
  std::vector<std::int64_t> labels(static_cast<std::size_t>(n));
  if (identity) {
    for (auto& [label, id] : index) id = static_cast<NodeId>(label - 1);
    for (long long i = 0; i < n; ++i) labels[i] = i + 1;
  } else {
    NodeId next = 0;
    for (auto& [label, id] : index) {
      labels[next] = label;
      id = next++;
    }
    // Labels for nodes that never appear in an edge; the graph will be
    // rejected as disconnected unless n == 1.
    std::int64_t fill = index.empty() ? 1 : index.rbegin()->first + 1;
    for (std::size_t i = next; i < labels.size(); ++i) labels[i] = fill++;
  }
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) edges.push_back({index.at(e.u), index.at(e.v), e.w});
  WeightedGraph g(static_cast<std::size_t>(n), std::move(edges), w_max, kappa);
  g.set_labels(std::move(labels));
  return g;
}

std::string format_edge_list(const WeightedGraph& g) {
  std::ostringstream out;
  out << g.node_count() << ' ' << g.edge_count() << ' ' << g.max_weight() << '\n';
  for (const auto& e : g.edges()) {
    out << external_id(e.u) << ' ' << external_id(e.v) << ' ' << e.w << '\n';
  }
  return out.str();
}

WeightedGraph read_edge_list_file(const std::string& path, int kappa) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str(), kappa);
}

void write_edge_list_file(const WeightedGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write graph file '" + path + "'");
  out << format_edge_list(g);
}

namespace {

constexpr std::pair<std::string_view, GraphKind> kKindNames[] = {
    {"path", GraphKind::path},
    {"cycle", GraphKind::cycle},
    {"star", GraphKind::star},
    {"grid", GraphKind::grid},
    {"complete", GraphKind::complete},
    {"erdos_renyi", GraphKind::erdos_renyi},
    {"barbell", GraphKind::barbell},
    {"lollipop", GraphKind::lollipop},
    {"binary_tree", GraphKind::binary_tree},
    {"random_tree", GraphKind::random_tree},
};

void add_clique(std::vector<Edge>& edges, NodeId first, NodeId count) {
  for (NodeId i = first; i < first + count; ++i) {
    for (NodeId j = i + 1; j < first + count; ++j) edges.push_back({i, j, 1});
  }
}

std::size_t require_n(const GenParams& p, std::size_t minimum, std::string_view kind) {
  if (p.n < minimum) {
    throw ValidationError(std::string(kind) + " needs n >= " + std::to_string(minimum));
  }
  return p.n;
}

}  // namespace

std::optional<GraphKind> parse_graph_kind(std::string_view name) {
  for (const auto& [label, kind] : kKindNames) {
    if (label == name) return kind;
  }
  if (name == "er" || name == "random") return GraphKind::erdos_renyi;
  if (name == "clique") return GraphKind::complete;
  return std::nullopt;
}

std::string_view to_string(GraphKind kind) {
  for (const auto& [label, k] : kKindNames) {
    if (k == kind) return label;
  }
  return "unknown";
}

WeightedGraph generate(GraphKind kind, const GenParams& params, std::uint64_t seed) {
  std::vector<Edge> edges;
  std::size_t n = params.n;
  switch (kind) {
    case GraphKind::path:
      n = require_n(params, 1, "path");
      for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1});
      break;
    case GraphKind::cycle:
      n = require_n(params, 3, "cycle");
      for (NodeId i = 0; i < n; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % n), 1});
      break;
    case GraphKind::star:
      n = require_n(params, 1, "star");
      for (NodeId i = 1; i < n; ++i) edges.push_back({0, i, 1});
      break;
    case GraphKind::grid: {
      if (params.rows == 0 || params.cols == 0) {
        throw ValidationError("grid needs positive rows and cols");
      }
      n = params.rows * params.cols;
      for (std::size_t r = 0; r < params.rows; ++r) {
        for (std::size_t c = 0; c < params.cols; ++c) {
          const auto v = static_cast<NodeId>(r * params.cols + c);
          if (c + 1 < params.cols) edges.push_back({v, v + 1, 1});
          if (r + 1 < params.rows) edges.push_back({v, static_cast<NodeId>(v + params.cols), 1});
        }
      }
      break;
    }
    case GraphKind::complete:
      n = require_n(params, 1, "complete");
      add_clique(edges, 0, static_cast<NodeId>(n));
      break;
    case GraphKind::erdos_renyi: {
      n = require_n(params, 1, "erdos_renyi");
      const double p = params.edge_probability;
      if (!(p > 0.0 && p <= 1.0)) throw ValidationError("erdos_renyi needs p in (0, 1]");
      constexpr int kMaxAttempts = 1000;
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts) {
          throw ValidationError("erdos_renyi: no connected sample after 1000 attempts");
        }
        Rng rng(derive_seed(seed, "erdos_renyi", static_cast<std::uint64_t>(attempt)));
        edges.clear();
        for (NodeId i = 0; i < n; ++i) {
          for (NodeId j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) edges.push_back({i, j, 1});
          }
        }
        // Cheap connectivity check before committing.
        std::vector<NodeId> parent(n);
        for (NodeId i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](NodeId x) {
          while (parent[x] != x) x = parent[x] = parent[parent[x]];
          return x;
        };
        std::size_t components = n;
        for (const auto& e : edges) {
          const NodeId a = find(e.u), b = find(e.v);
          if (a != b) {
            parent[a] = b;
            --components;
          }
        }
        if (components == 1) break;
      }
      break;
    }
    case GraphKind::barbell: {
      // Two cliques of size c joined through a path of n - 2c inner nodes.
      const std::size_t c = params.clique;
      if (c < 1 || params.n < 2 * c) throw ValidationError("barbell needs 1 <= clique <= n/2");
      n = params.n;
      add_clique(edges, 0, static_cast<NodeId>(c));
      for (NodeId i = static_cast<NodeId>(c - 1); i + 1 < n - c + 1; ++i) {
        edges.push_back({i, i + 1, 1});
      }
      add_clique(edges, static_cast<NodeId>(n - c), static_cast<NodeId>(c));
      break;
    }
    case GraphKind::lollipop: {
      // Clique on nodes 1..c, tail c+1..n hanging off node c.
      const std::size_t c = params.clique;
      if (c < 1 || params.n < c) throw ValidationError("lollipop needs 1 <= clique <= n");
      n = params.n;
      add_clique(edges, 0, static_cast<NodeId>(c));
      for (NodeId i = static_cast<NodeId>(c - 1); i + 1 < n; ++i) edges.push_back({i, i + 1, 1});
      break;
    }
    case GraphKind::binary_tree:
      n = require_n(params, 1, "binary_tree");
      for (NodeId i = 1; i < n; ++i) edges.push_back({(i - 1) / 2, i, 1});
      break;
    case GraphKind::random_tree: {
      n = require_n(params, 1, "random_tree");
      Rng rng(derive_seed(seed, "random_tree"));
      for (NodeId i = 1; i < n; ++i) edges.push_back({static_cast<NodeId>(rng.uniform(i)), i, 1});
      break;
    }
  }

  Weight w_max = params.max_weight.value_or(
      std::min<Weight>(static_cast<Weight>(n * n + n), poly_bound(n, kDefaultKappa)));
  if (params.max_edge_weight > 1) {
    if (params.max_edge_weight > w_max) {
      throw ValidationError("max edge weight exceeds declared W");
    }
    Rng rng(derive_seed(seed, "weights"));
    for (auto& e : edges) {
      e.w = 1 + static_cast<Weight>(rng.uniform(static_cast<std::uint64_t>(params.max_edge_weight)));
    }
  }
  return WeightedGraph(n, std::move(edges), w_max);
}

std::vector<std::uint32_t> hop_distances(const WeightedGraph& g, NodeId source) {
  constexpr auto kUnseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(g.node_count(), kUnseen);
  std::vector<NodeId> queue;
  queue.reserve(g.node_count());
  dist.at(source) = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (const Arc& a : g.neighbors(u)) {
      if (dist[a.to] == kUnseen) {
        dist[a.to] = dist[u] + 1;
        queue.push_back(a.to);
      }
    }
  }
  return dist;
}

NeighborhoodProfile neighborhood_profile(const WeightedGraph& g, NodeId v) {
  const auto dist = hop_distances(g, v);
  const std::uint32_t ecc = *std::max_element(dist.begin(), dist.end());
  NeighborhoodProfile p{v, std::vector<std::size_t>(ecc + 1, 0)};
  for (const auto d : dist) ++p.sizes[d];
  for (std::size_t d = 1; d < p.sizes.size(); ++d) p.sizes[d] += p.sizes[d - 1];
  return p;
}

std::vector<NeighborhoodProfile> all_neighborhood_profiles(const WeightedGraph& g) {
  std::vector<NeighborhoodProfile> out;
  out.reserve(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) out.push_back(neighborhood_profile(g, v));
  return out;
}

std::vector<std::size_t> min_neighborhood_profile(const WeightedGraph& g) {
  const auto profiles = all_neighborhood_profiles(g);
  std::size_t diameter = 0;
  for (const auto& p : profiles) diameter = std::max(diameter, p.sizes.size() - 1);
  std::vector<std::size_t> out(diameter + 1, g.node_count());
  for (const auto& p : profiles) {
    for (std::size_t d = 0; d <= diameter; ++d) out[d] = std::min(out[d], p.at(d));
  }
  return out;
}

std::size_t hop_diameter(const WeightedGraph& g) {
  std::size_t diameter = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto dist = hop_distances(g, v);
    diameter = std::max<std::size_t>(diameter, *std::max_element(dist.begin(), dist.end()));
  }
  return diameter;
}

DistanceLabels exact_distances(const WeightedGraph& g, NodeId source,
                               std::optional<std::size_t> hop_limit) {
  const std::size_t n = g.node_count();
  DistanceLabels out{source, std::vector<Weight>(n, kInfinity), hop_limit};
  out.dist.at(source) = 0;
  if (hop_limit) {
    // Synchronous Bellman-Ford: after round i, dist holds d_{G,i}.
    std::vector<Weight> next;
    for (std::size_t round = 0; round < *hop_limit; ++round) {
      next = out.dist;
      bool changed = false;
      for (const auto& e : g.edges()) {
        if (out.dist[e.u] != kInfinity && out.dist[e.u] + e.w < next[e.v]) {
          next[e.v] = out.dist[e.u] + e.w;
          changed = true;
        }
        if (out.dist[e.v] != kInfinity && out.dist[e.v] + e.w < next[e.u]) {
          next[e.u] = out.dist[e.v] + e.w;
          changed = true;
        }
      }
      out.dist.swap(next);
      if (!changed) break;
    }
    return out;
  }
  using Item = std::pair<Weight, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0, source});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d != out.dist[u]) continue;
    for (const Arc& a : g.neighbors(u)) {
      if (d + a.w < out.dist[a.to]) {
        out.dist[a.to] = d + a.w;
        pq.push({out.dist[a.to], a.to});
      }
    }
  }
  return out;
}

}  // namespace hybrid::graph
