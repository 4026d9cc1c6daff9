#include "hybrid/ruling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "hybrid/bits.hpp"
#include "hybrid/comm.hpp"
#include "hybrid/errors.hpp"

namespace hybrid::ruling {

namespace {

constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

std::vector<std::size_t> multi_source_hops(const graph::WeightedGraph& g,
                                           const std::vector<NodeId>& sources) {
  std::vector<std::size_t> dist(g.node_count(), std::numeric_limits<std::size_t>::max());
  std::vector<NodeId> queue;
  for (const auto s : sources) {
    dist.at(s) = 0;
    queue.push_back(s);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (const auto& a : g.neighbors(u)) {
      if (dist[a.to] == std::numeric_limits<std::size_t>::max()) {
        dist[a.to] = dist[u] + 1;
        queue.push_back(a.to);
      }
    }
  }
  return dist;
}

}  // namespace

RulingSet ruling_set(sim::Network& net, std::size_t alpha) {
  if (alpha < 1) throw ValidationError("alpha must be at least 1");
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  const std::uint32_t bits = ceil_log2(n);
  net.set_phase("ruling_set");
  std::vector<bool> ruler(n, true);

  if (alpha > 1) {
    for (std::uint32_t b = 0; b < bits; ++b) {
      std::vector<std::unordered_set<std::uint64_t>> heard(n);
      std::vector<std::vector<std::uint64_t>> frontier(n);
      for (NodeId v = 0; v < n; ++v) {
        if (ruler[v] && ((v >> b) & 1) == 0) {
          const std::uint64_t tag = v >> (b + 1);
          heard[v].insert(tag);
          frontier[v].push_back(tag);
        }
      }
      for (std::size_t hop = 1; hop < alpha; ++hop) {
        for (NodeId v = 0; v < n; ++v) {
          if (frontier[v].empty()) continue;
          for (const auto& a : g.neighbors(v)) net.send_local(v, a.to, frontier[v]);
        }
        const auto in = net.step();
        for (NodeId v = 0; v < n; ++v) {
          frontier[v].clear();
          for (const auto& m : in.local[v]) {
            for (const auto tag : m.words) {
              if (heard[v].insert(tag).second) frontier[v].push_back(tag);
            }
          }
          std::sort(frontier[v].begin(), frontier[v].end());
        }
      }
      for (NodeId v = 0; v < n; ++v) {
        if (ruler[v] && ((v >> b) & 1) == 1 && heard[v].count(v >> (b + 1)) != 0) {
          ruler[v] = false;
        }
      }
    }
  }
  RulingSet r;
  r.alpha = alpha;
  r.beta = alpha * log_n(n);
  for (NodeId v = 0; v < n; ++v) {
    if (ruler[v]) r.members.push_back(v);
  }
  return r;
}

RulingSet ruling_set(const graph::WeightedGraph& g, std::size_t alpha,
                     const sim::SimConfig& config, sim::ExecutionTrace* trace) {
  sim::Network net(g, config, trace);
  return ruling_set(net, alpha);
}

bool verify_ruling_set(const graph::WeightedGraph& g, const std::vector<NodeId>& members,
                       std::size_t alpha, std::size_t beta, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why != nullptr) *why = std::move(msg);
    return false;
  };
  if (members.empty()) return fail("empty ruling set");
  std::vector<bool> is_member(g.node_count(), false);
  for (const auto m : members) is_member.at(m) = true;
  for (const auto m : members) {
    const auto dist = graph::hop_distances(g, m);
    for (const auto other : members) {
      if (other != m && dist[other] < alpha) {
        return fail("members " + std::to_string(m + 1) + " and " + std::to_string(other + 1) +
                    " are " + std::to_string(dist[other]) + " hops apart");
      }
    }
  }
  const auto cover = multi_source_hops(g, members);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (cover[v] > beta) {
      return fail("node " + std::to_string(v + 1) + " is " + std::to_string(cover[v]) +
                  " hops from the set");
    }
  }
  return true;
}

Clustering cluster_nearest_ruler(sim::Network& net, const std::vector<NodeId>& rulers,
                                 std::size_t rounds) {
  if (rulers.empty()) throw ValidationError("clustering needs at least one ruler");
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  net.set_phase("clustering");
  Clustering c;
  c.ruler_of.assign(n, kNone);
  c.depth.assign(n, 0);
  c.parent.assign(n, kNone);
  std::vector<NodeId> frontier;
  for (const auto r : rulers) {
    c.ruler_of.at(r) = r;
    c.parent[r] = r;
    frontier.push_back(r);
  }
  for (std::size_t t = 1; t <= rounds; ++t) {
    for (const auto v : frontier) {
      for (const auto& a : g.neighbors(v)) net.send_local(v, a.to, {c.ruler_of[v]});
    }
    const auto in = net.step();
    frontier.clear();
    for (NodeId v = 0; v < n; ++v) {
      if (c.ruler_of[v] != kNone || in.local[v].empty()) continue;
      // Inbox is sorted by sender, so the first match is the smallest-ID parent.
      NodeId best = kNone, parent = kNone;
      for (const auto& m : in.local[v]) {
        const auto r = static_cast<NodeId>(m.words[0]);
        if (r < best) {
          best = r;
          parent = m.src;
        }
      }
      c.ruler_of[v] = best;
      c.parent[v] = parent;
      c.depth[v] = t;
      frontier.push_back(v);
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (c.ruler_of[v] == kNone) {
      throw std::logic_error("clustering left node " + std::to_string(v + 1) + " unassigned");
    }
  }
  std::vector<std::uint64_t> depths(c.depth.begin(), c.depth.end());
  c.max_depth = comm::aggregate(net, depths, comm::AggregateOp::max);
  for (NodeId v = 0; v < n; ++v) c.members_of[c.ruler_of[v]].push_back(v);
  return c;
}

Clustering cluster_nearest_ruler_oracle(const graph::WeightedGraph& g,
                                        const std::vector<NodeId>& rulers) {
  const std::size_t n = g.node_count();
  const auto dist = multi_source_hops(g, rulers);
  Clustering c;
  c.ruler_of.assign(n, kNone);
  c.parent.assign(n, kNone);
  c.depth = dist;
  // Process by layer so every parent is settled first.
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return dist[a] < dist[b]; });
  for (const auto v : order) {
    if (dist[v] == 0) {
      c.ruler_of[v] = v;
      c.parent[v] = v;
      continue;
    }
    for (const auto& a : g.neighbors(v)) {
      if (dist[a.to] + 1 != dist[v]) continue;
      if (c.ruler_of[a.to] < c.ruler_of[v] ||
          (c.ruler_of[a.to] == c.ruler_of[v] && a.to < c.parent[v])) {
        c.ruler_of[v] = c.ruler_of[a.to];
        c.parent[v] = a.to;
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    c.max_depth = std::max(c.max_depth, c.depth[v]);
    c.members_of[c.ruler_of[v]].push_back(v);
  }
  return c;
}

std::vector<NodeId> sample_iid_targets(std::size_t n, std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "targets"));
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<NodeId>(rng.uniform(n)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Sends every node's pending words to its tree parent for `rounds` rounds;
// receivers append what they get to their own pending list and to `gathered`.
// Returns, per node, the words it collected from below together with the
// child that delivered them.
void convergecast(sim::Network& net, const Clustering& c, std::size_t rounds,
                  std::vector<std::vector<std::uint64_t>>& pending,
                  std::vector<std::vector<std::pair<NodeId, std::vector<std::uint64_t>>>>& got) {
  const std::size_t n = c.parent.size();
  for (std::size_t t = 0; t < rounds; ++t) {
    for (NodeId v = 0; v < n; ++v) {
      if (c.parent[v] != v && !pending[v].empty()) {
        net.send_local(v, c.parent[v], std::move(pending[v]));
      }
      pending[v].clear();
    }
    const auto in = net.step();
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.local[v]) {
        pending[v].insert(pending[v].end(), m.words.begin(), m.words.end());
        got[v].push_back({m.src, m.words});
      }
    }
  }
}

// Floods each ruler's message down its tree for `rounds` rounds. children[v]
// are the nodes that reported to v during a convergecast.
std::vector<std::vector<std::uint64_t>> broadcast_down(
    sim::Network& net, const std::vector<std::vector<NodeId>>& children,
    std::vector<std::vector<std::uint64_t>> at_root, const Clustering& c, std::size_t rounds) {
  const std::size_t n = c.parent.size();
  std::vector<std::vector<std::uint64_t>> known(n);
  std::vector<bool> has(n, false), fresh(n, false);
  for (NodeId v = 0; v < n; ++v) {
    if (c.parent[v] == v) {
      known[v] = std::move(at_root[v]);
      has[v] = fresh[v] = true;
    }
  }
  for (std::size_t t = 0; t < rounds; ++t) {
    for (NodeId v = 0; v < n; ++v) {
      if (!fresh[v]) continue;
      for (const auto ch : children[v]) net.send_local(v, ch, known[v]);
      fresh[v] = false;
    }
    const auto in = net.step();
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.local[v]) {
        if (has[v]) continue;
        known[v] = m.words;
        has[v] = fresh[v] = true;
      }
    }
  }
  return known;
}

}  // namespace

HelperFamily build_helper_sets(sim::Network& net, const std::vector<NodeId>& targets,
                               const HelperParams& params, const Rational& nq) {
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  if (params.gamma < 1 || params.k < 1) throw ValidationError("k and gamma must be positive");
  if (nq < Rational(1)) throw ValidationError("NQ must be at least 1");
  HelperFamily fam;
  fam.nq_used = nq;
  fam.targets = targets;
  std::sort(fam.targets.begin(), fam.targets.end());
  fam.targets.erase(std::unique(fam.targets.begin(), fam.targets.end()), fam.targets.end());
  for (const auto t : fam.targets) {
    if (t >= n) throw ValidationError("target outside the graph");
  }
  if (fam.targets.empty()) return fam;
  const std::size_t start = net.rounds_executed();

  fam.alpha = 2 * static_cast<std::size_t>(nq.ceil()) + 1;
  fam.rulers = ruling_set(net, fam.alpha);
  fam.clusters = cluster_nearest_ruler(net, fam.rulers.members, fam.rulers.beta);
  const Clustering& c = fam.clusters;
  const std::size_t depth = c.max_depth;
  net.set_phase("helper_gather");

  std::vector<bool> is_target(n, false);
  for (const auto t : fam.targets) is_target[t] = true;

  // Gather C_r and C_r n W at the ruler. Entries are 2 id + flag.
  std::vector<std::vector<std::uint64_t>> pending(n);
  std::vector<std::vector<std::pair<NodeId, std::vector<std::uint64_t>>>> got(n);
  for (NodeId v = 0; v < n; ++v) pending[v] = {2 * std::uint64_t{v} + (is_target[v] ? 1 : 0)};
  convergecast(net, c, depth, pending, got);

  std::vector<std::vector<NodeId>> children(n);
  fam.down_route.assign(n, {});
  std::vector<std::vector<std::uint64_t>> at_root(n);
  for (NodeId v = 0; v < n; ++v) {
    for (const auto& [child, words] : got[v]) {
      if (std::find(children[v].begin(), children[v].end(), child) == children[v].end()) {
        children[v].push_back(child);
      }
      for (const auto w : words) fam.down_route[v][static_cast<NodeId>(w / 2)] = child;
    }
    std::sort(children[v].begin(), children[v].end());
    if (c.parent[v] == v) {
      // Message: |C_r|, then the targets of the cluster.
      std::uint64_t size = 1;
      std::vector<std::uint64_t> tgts;
      if (is_target[v]) tgts.push_back(v);
      for (const auto& [child, words] : got[v]) {
        size += words.size();
        for (const auto w : words) {
          if (w & 1) tgts.push_back(w / 2);
        }
      }
      std::sort(tgts.begin(), tgts.end());
      at_root[v] = {size};
      at_root[v].insert(at_root[v].end(), tgts.begin(), tgts.end());
    }
  }
  const auto info = broadcast_down(net, children, std::move(at_root), c, depth);

  // Coin flips.
  const double ln_n = std::log(static_cast<double>(n));
  const double load = static_cast<double>(params.k) /
                      (static_cast<double>(params.gamma) * nq.to_double());
  std::vector<std::vector<std::uint64_t>> joins(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto& msg = info[v];
    const double cluster_size = static_cast<double>(msg.at(0));
    const double q = std::min(load / cluster_size * 8.0 * params.c * ln_n, 1.0);
    Rng rng = net.node_rng(v, "helper_coins");
    for (std::size_t i = 1; i < msg.size(); ++i) {
      const auto w = static_cast<NodeId>(msg[i]);
      if (v == w) fam.q_used[w] = q;
      if (rng.bernoulli(q)) {
        joins[v].push_back(w);
        joins[v].push_back(v);
      }
    }
  }

  // Share memberships inside each cluster: up to the ruler, then down.
  std::vector<std::vector<std::pair<NodeId, std::vector<std::uint64_t>>>> got2(n);
  std::vector<std::vector<std::uint64_t>> pending2 = joins;
  convergecast(net, c, depth, pending2, got2);
  std::vector<std::vector<std::uint64_t>> all_joins(n);
  for (NodeId v = 0; v < n; ++v) {
    if (c.parent[v] != v) continue;
    all_joins[v] = joins[v];
    for (const auto& [child, words] : got2[v]) {
      all_joins[v].insert(all_joins[v].end(), words.begin(), words.end());
    }
  }
  const auto memberships = broadcast_down(net, children, std::move(all_joins), c, depth);
  for (const auto w : fam.targets) {
    auto& h = fam.helpers[w];
    const auto& mine = memberships[w];
    for (std::size_t i = 0; i + 1 < mine.size(); i += 2) {
      if (mine[i] == w) h.push_back(static_cast<NodeId>(mine[i + 1]));
    }
    std::sort(h.begin(), h.end());
  }
  fam.rounds = net.rounds_executed() - start;
  return fam;
}

HelperCheck verify_helpers(const graph::WeightedGraph& g, const HelperFamily& fam,
                           const HelperParams& params) {
  HelperCheck check;
  const std::size_t n = g.node_count();
  const double ln_n = std::log(static_cast<double>(n));
  const std::size_t hop_cap = 2 * fam.alpha * log_n(n);
  std::vector<std::size_t> memberships(n, 0);
  for (const auto w : fam.targets) {
    const auto it = fam.helpers.find(w);
    const std::vector<NodeId> empty;
    const auto& h = it == fam.helpers.end() ? empty : it->second;
    const double q = fam.q_used.count(w) != 0 ? fam.q_used.at(w) : 0.0;
    const NodeId r = fam.clusters.ruler_of.at(w);
    const std::size_t cluster = fam.clusters.members_of.at(r).size();
    if (q >= 1.0) {
      // |C_r| (NQ + 1) gamma >= k, exactly.
      const Rational lhs = Rational(static_cast<std::int64_t>(cluster)) *
                           (fam.nq_used + Rational(1)) *
                           Rational(static_cast<std::int64_t>(params.gamma));
      if (h.size() != cluster || lhs < Rational(static_cast<std::int64_t>(params.k))) {
        check.size_ok = false;
        check.detail += "target " + std::to_string(w + 1) + ": full cluster of " +
                        std::to_string(cluster) + " below k/((NQ+1)gamma); ";
      }
    } else {
      const double need = 4.0 * params.c * ln_n * static_cast<double>(params.k) /
                          (static_cast<double>(params.gamma) * fam.nq_used.to_double());
      if (static_cast<double>(h.size()) < need) {
        check.size_ok = false;
        check.detail += "target " + std::to_string(w + 1) + ": " + std::to_string(h.size()) +
                        " helpers < " + std::to_string(need) + "; ";
      }
    }
    const auto dist = graph::hop_distances(g, w);
    for (const auto u : h) {
      ++memberships[u];
      check.max_hops = std::max<std::size_t>(check.max_hops, dist[u]);
      if (dist[u] > hop_cap) {
        check.locality_ok = false;
        check.detail += "helper " + std::to_string(u + 1) + " of " + std::to_string(w + 1) +
                        " is " + std::to_string(dist[u]) + " hops away; ";
      }
    }
  }
  const double load_cap = 16.0 * params.c * ln_n;
  for (NodeId v = 0; v < n; ++v) {
    check.max_memberships = std::max(check.max_memberships, memberships[v]);
    if (static_cast<double>(memberships[v]) > load_cap) {
      check.load_ok = false;
      check.detail += "node " + std::to_string(v + 1) + " serves " +
                      std::to_string(memberships[v]) + " targets; ";
    }
  }
  return check;
}

nlohmann::json to_json(const HelperFamily& fam) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto w : fam.targets) {
    nlohmann::json ids = nlohmann::json::array();
    if (auto it = fam.helpers.find(w); it != fam.helpers.end()) {
      for (const auto u : it->second) ids.push_back(graph::external_id(u));
    }
    const double q = fam.q_used.count(w) != 0 ? fam.q_used.at(w) : 0.0;
    targets.push_back({{"target", graph::external_id(w)}, {"helpers", std::move(ids)},
                       {"q_used", q}});
  }
  nlohmann::json rulers = nlohmann::json::array();
  for (const auto r : fam.rulers.members) rulers.push_back(graph::external_id(r));
  return {{"alpha", fam.alpha},
          {"nq_num", fam.nq_used.num()},
          {"nq_den", fam.nq_used.den()},
          {"rulers", std::move(rulers)},
          {"cluster_depth", fam.clusters.max_depth},
          {"targets", std::move(targets)},
          {"rounds", fam.rounds}};
}

}  // namespace hybrid::ruling
