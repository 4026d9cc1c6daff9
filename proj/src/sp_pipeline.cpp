#include "hybrid/sp_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "hybrid/bits.hpp"
#include "hybrid/comm.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/ruling.hpp"

namespace hybrid::sp {

using graph::kInfinity;

namespace {

Weight edge_weight(const graph::WeightedGraph& g, NodeId a, NodeId b) {
  const auto e = g.edge_between(a, b);
  if (!e) throw std::logic_error("no edge between local message endpoints");
  return g.edges()[*e].w;
}

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

SPInstance make_iid_instance(std::size_t n, std::vector<NodeId> sources, std::size_t ell,
                             std::uint64_t seed) {
  SPInstance inst;
  inst.sources = sorted_unique(std::move(sources));
  inst.targets = ruling::sample_iid_targets(n, ell, seed);
  inst.mode = routing::TargetMode::iid;
  return inst;
}

MultiSourceDistances sssp_exact_reference(sim::Network& net, const std::vector<NodeId>& roots) {
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  const std::size_t r = roots.size();
  if (r == 0) throw ValidationError("need at least one root");
  const std::size_t start = net.rounds_executed();
  net.set_phase("sssp");
  MultiSourceDistances out;
  out.dist.assign(n, std::vector<Weight>(r, kInfinity));
  std::vector<bool> changed(n, false);
  for (std::size_t i = 0; i < r; ++i) {
    out.dist.at(roots[i])[i] = 0;
    changed[roots[i]] = true;
  }
  while (true) {
    for (NodeId v = 0; v < n; ++v) {
      if (!changed[v]) continue;
      std::vector<std::uint64_t> words(out.dist[v].begin(), out.dist[v].end());
      for (const auto& a : g.neighbors(v)) net.send_local(v, a.to, words);
    }
    const auto in = net.step();
    std::fill(changed.begin(), changed.end(), false);
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.local[v]) {
        const Weight w = edge_weight(g, m.src, v);
        for (std::size_t i = 0; i < r; ++i) {
          const auto d = static_cast<Weight>(m.words[i]);
          if (d != kInfinity && d + w < out.dist[v][i]) {
            out.dist[v][i] = d + w;
            changed[v] = true;
          }
        }
      }
    }
    std::vector<std::uint64_t> flags(changed.begin(), changed.end());
    if (comm::aggregate(net, flags, comm::AggregateOp::sum) == 0) break;
  }
  out.rounds = net.rounds_executed() - start;
  return out;
}

SkeletonGraph skeleton_build(sim::Network& net, double x, const std::vector<NodeId>& forced) {
  if (!(x >= 1.0)) throw ValidationError("skeleton sampling parameter x must be >= 1");
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  const std::size_t start = net.rounds_executed();
  net.set_phase("skeleton");
  SkeletonGraph s;
  s.x = x;
  s.h = static_cast<std::size_t>(
      std::ceil(net.config().c * x * std::log(static_cast<double>(n))));
  s.h = std::max<std::size_t>(s.h, 1);

  std::vector<bool> sampled(n, false);
  for (const auto v : forced) sampled.at(v) = true;
  for (NodeId v = 0; v < n; ++v) {
    Rng rng = net.node_rng(v, "skeleton");
    if (rng.bernoulli(1.0 / x)) sampled[v] = true;
  }
  std::vector<std::map<NodeId, Weight>> known(n);
  std::vector<std::vector<std::uint64_t>> fresh(n);
  for (NodeId v = 0; v < n; ++v) {
    if (!sampled[v]) continue;
    s.nodes.push_back(v);
    known[v][v] = 0;
    fresh[v] = {v, 0};
  }
  // Synchronous relaxation: after round t, known[v] holds d_t.
  for (std::size_t t = 0; t < s.h; ++t) {
    for (NodeId v = 0; v < n; ++v) {
      if (fresh[v].empty()) continue;
      for (const auto& a : g.neighbors(v)) net.send_local(v, a.to, fresh[v]);
    }
    const auto in = net.step();
    std::vector<std::map<NodeId, Weight>> improved(n);
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.local[v]) {
        const Weight w = edge_weight(g, m.src, v);
        for (std::size_t i = 0; i + 1 < m.words.size(); i += 2) {
          const auto src = static_cast<NodeId>(m.words[i]);
          const Weight d = static_cast<Weight>(m.words[i + 1]) + w;
          const auto it = known[v].find(src);
          if (it != known[v].end() && it->second <= d) continue;
          auto [pos, inserted] = improved[v].emplace(src, d);
          if (!inserted) pos->second = std::min(pos->second, d);
        }
      }
      fresh[v].clear();
      for (const auto& [src, d] : improved[v]) {
        known[v][src] = d;
        fresh[v].push_back(src);
        fresh[v].push_back(static_cast<std::uint64_t>(d));
      }
    }
  }
  s.hop_limited.resize(n);
  for (NodeId v = 0; v < n; ++v) s.hop_limited[v].assign(known[v].begin(), known[v].end());

  // The larger endpoint holds each virtual edge.
  std::vector<std::vector<comm::Item>> holders(n);
  std::vector<std::uint64_t> counts(n, 0);
  for (const auto u : s.nodes) {
    for (const auto& [src, d] : known[u]) {
      if (src < u && sampled[src]) {
        holders[u].push_back({static_cast<std::uint64_t>(src) * n + u, static_cast<std::uint64_t>(d)});
        ++counts[u];
      }
    }
  }
  const std::size_t edge_count = comm::aggregate(net, counts, comm::AggregateOp::sum);
  const auto shared = comm::broadcast_set(net, holders, edge_count, 3 * net.field_bits());
  for (const auto& it : shared.known.at(0)) {
    s.edges.push_back({static_cast<NodeId>(it.key / n), static_cast<NodeId>(it.key % n),
                       static_cast<Weight>(it.value)});
  }
  s.rounds = net.rounds_executed() - start;
  return s;
}

std::vector<std::vector<Weight>> skeleton_distances(const SkeletonGraph& s) {
  const std::size_t m = s.nodes.size();
  std::map<NodeId, std::size_t> idx;
  for (std::size_t i = 0; i < m; ++i) idx[s.nodes[i]] = i;
  std::vector<std::vector<std::pair<std::size_t, Weight>>> adj(m);
  for (const auto& e : s.edges) {
    adj[idx.at(e.u)].push_back({idx.at(e.v), e.w});
    adj[idx.at(e.v)].push_back({idx.at(e.u), e.w});
  }
  std::vector<std::vector<Weight>> out(m, std::vector<Weight>(m, kInfinity));
  using Item = std::pair<Weight, std::size_t>;
  for (std::size_t src = 0; src < m; ++src) {
    auto& dist = out[src];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d != dist[u]) continue;
      for (const auto& [v, w] : adj[u]) {
        if (d + w < dist[v]) {
          dist[v] = d + w;
          pq.push({dist[v], v});
        }
      }
    }
  }
  return out;
}

SPResult solve_k_ell_sp(const graph::WeightedGraph& g, const SPInstance& instance,
                        const SPOptions& options, const sim::SimConfig& config,
                        sim::ExecutionTrace* trace_a, sim::ExecutionTrace* trace_b) {
  const std::size_t n = g.node_count();
  const auto sources = sorted_unique(instance.sources);
  const auto targets = sorted_unique(instance.targets);
  if (sources.empty() || targets.empty()) throw ValidationError("need sources and targets");
  for (const auto v : sources) {
    if (v >= n) throw ValidationError("source outside the graph");
  }
  for (const auto v : targets) {
    if (v >= n) throw ValidationError("target outside the graph");
  }
  if (!(instance.eps > Rational(0))) throw ValidationError("eps must be positive");
  if (instance.mode == routing::TargetMode::fixed &&
      !routing::within_hypothesis(routing::TargetMode::fixed, targets.size(), Rational(1), n)) {
    throw ValidationError("fixed-target mode supports at most ceil(log2 n)^2 targets");
  }

  SPResult result;
  // label[s][j] = d~(s, t_j) as known at s after phase A.
  std::vector<std::vector<Weight>> label(n);
  {
    sim::Network net(g, config, trace_a);
    if (options.mode == DistanceMode::exact) {
      auto md = sssp_exact_reference(net, targets);
      for (const auto s : sources) label[s] = md.dist[s];
    } else {
      const auto sk = skeleton_build(net, options.skeleton_x, targets);
      const auto ds = skeleton_distances(sk);
      std::map<NodeId, std::size_t> idx;
      for (std::size_t i = 0; i < sk.nodes.size(); ++i) idx[sk.nodes[i]] = i;
      for (const auto s : sources) {
        label[s].assign(targets.size(), kInfinity);
        for (std::size_t j = 0; j < targets.size(); ++j) {
          const std::size_t tj = idx.at(targets[j]);
          for (const auto& [u, d] : sk.hop_limited[s]) {
            const Weight via = ds[idx.at(u)][tj];
            if (via != kInfinity) label[s][j] = std::min(label[s][j], d + via);
          }
        }
      }
    }
    result.rounds_phase_a = net.rounds_executed();
  }
  for (const auto s : sources) {
    for (const auto d : label[s]) {
      if (d == kInfinity) {
        throw ValidationError("source " + std::to_string(s + 1) +
                              " has no distance estimate after phase A");
      }
    }
  }

  routing::RouteRequest req;
  req.sources = sources;
  req.targets = targets;
  req.gamma = options.gamma;
  req.mode = instance.mode;
  req.c = config.c;
  for (const auto s : sources) {
    for (std::size_t j = 0; j < targets.size(); ++j) {
      req.tokens.push_back({s, targets[j], static_cast<std::uint64_t>(label[s][j])});
    }
  }
  sim::Network net(g, config, trace_b);
  auto run = routing::run_routing(net, req);
  result.rounds_phase_b = net.rounds_executed();
  result.delivery = std::move(run.report);
  result.nq = std::move(run.nq);
  for (const auto& [t, list] : result.delivery.delivered) {
    for (const auto& [s, payload] : list) {
      result.labels.emplace_back(t, s, static_cast<Weight>(payload));
    }
  }
  std::sort(result.labels.begin(), result.labels.end());
  SPInstance normalized = instance;
  normalized.sources = sources;
  normalized.targets = targets;
  result.stretch = stretch_of(g, normalized, result.labels);
  return result;
}

Rational stretch_of(const graph::WeightedGraph& g, const SPInstance& instance,
                    const std::vector<std::tuple<NodeId, NodeId, Weight>>& labels) {
  std::map<std::pair<NodeId, NodeId>, Weight> by_pair;
  for (const auto& [t, s, d] : labels) by_pair[{t, s}] = d;
  Rational worst(1);
  for (const auto t : instance.targets) {
    const auto exact = graph::exact_distances(g, t);
    for (const auto s : instance.sources) {
      const auto it = by_pair.find({t, s});
      if (it == by_pair.end()) {
        throw ValidationError("missing label for source " + std::to_string(s + 1) +
                              " at target " + std::to_string(t + 1));
      }
      const Weight d = exact.dist[s];
      if (it->second < d) {
        throw ValidationError("label underestimates d(" + std::to_string(s + 1) + ", " +
                              std::to_string(t + 1) + ")");
      }
      if (d == 0) {
        if (it->second != 0) throw ValidationError("non-zero label for a zero distance");
        continue;
      }
      worst = max(worst, Rational(it->second, d));
    }
  }
  return worst;
}

nlohmann::json to_json(const SPResult& r) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& [t, s, d] : r.labels) {
    labels.push_back({graph::external_id(t), graph::external_id(s), d, 1});
  }
  return {{"labels", std::move(labels)},
          {"stretch_num", r.stretch.num()},
          {"stretch_den", r.stretch.den()},
          {"rounds_phaseA", r.rounds_phase_a},
          {"rounds_phaseB", r.rounds_phase_b},
          {"delivery", routing::to_json(r.delivery)},
          {"nq_num", r.nq.value.num()},
          {"nq_den", r.nq.value.den()}};
}

}  // namespace hybrid::sp
