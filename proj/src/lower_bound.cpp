#include "hybrid/lower_bound.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hybrid/errors.hpp"
#include "hybrid/nq.hpp"
#include "hybrid/rng.hpp"
#include "hybrid/sp_pipeline.hpp"

namespace hybrid::lower_bound {

namespace {

std::vector<NodeId> collect_subtree(const RootedTree& t, NodeId r, NodeId skip = kNoNode) {
  std::vector<NodeId> out;
  if (r == skip) return out;
  std::vector<NodeId> stack{r};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (const auto c : t.children[u]) {
      if (c != skip) stack.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A candidate piece of V': its root (whose parent edge would join E') and size.
struct Piece {
  NodeId root;
  std::size_t size;
  bool parent_side = false;  // the part of a big tree above the splitting node
};

int kappa_for(std::size_t n, Weight w) {
  int kappa = graph::kDefaultKappa;
  while (graph::poly_bound(n, kappa) < w) ++kappa;
  return kappa;
}

}  // namespace

RootedTree make_rooted_tree(NodeId root, const std::vector<NodeId>& parent) {
  const std::size_t n = parent.size();
  if (root >= n) throw ValidationError("tree root outside the node range");
  if (parent[root] != kNoNode) throw ValidationError("tree root has a parent");
  RootedTree t;
  t.root = root;
  t.parent = parent;
  t.children.assign(n, {});
  t.subtree_size.assign(n, 0);
  std::size_t members = 1;
  for (NodeId u = 0; u < n; ++u) {
    if (u == root || parent[u] == kNoNode) continue;
    if (parent[u] >= n) throw ValidationError("parent outside the node range");
    t.children[parent[u]].push_back(u);
    ++members;
  }
  // Preorder from the root; anything unreached sits on a cycle.
  std::vector<NodeId> order{root};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto c : t.children[order[i]]) order.push_back(c);
  }
  if (order.size() != members) throw ValidationError("parent links do not form a tree");
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    t.subtree_size[*it] = 1;
    for (const auto c : t.children[*it]) t.subtree_size[*it] += t.subtree_size[c];
  }
  t.node_count = members;
  return t;
}

RootedTree bfs_tree(const graph::WeightedGraph& g, NodeId root) {
  const auto hops = graph::hop_distances(g, root);
  std::vector<NodeId> parent(g.node_count(), kNoNode);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (u == root) continue;
    for (const auto& a : g.neighbors(u)) {
      // Adjacency is sorted, so the first hit is the smallest ID.
      if (hops[a.to] + 1 == hops[u]) {
        parent[u] = a.to;
        break;
      }
    }
  }
  return make_rooted_tree(root, parent);
}

NodeId splitting_node(const RootedTree& tree, NodeId subroot) {
  const std::size_t n = tree.subtree_size.at(subroot);
  if (n == 0) throw ValidationError("splitting_node on a non-member");
  NodeId x = subroot;
  while (true) {
    NodeId best = kNoNode;
    for (const auto c : tree.children[x]) {
      if (best == kNoNode || tree.subtree_size[c] > tree.subtree_size[best]) best = c;
    }
    if (best == kNoNode || 2 * tree.subtree_size[best] <= n) return x;
    x = best;
  }
}

std::vector<std::size_t> split_components(const RootedTree& tree, NodeId subroot, NodeId x) {
  std::vector<std::size_t> sizes;
  const std::size_t above = tree.subtree_size.at(subroot) - tree.subtree_size.at(x);
  if (above > 0) sizes.push_back(above);
  for (const auto c : tree.children[x]) sizes.push_back(tree.subtree_size[c]);
  return sizes;
}

Weight Polynomial::at(std::size_t n) const {
  if (coefficient == 0 || exponent == 0) throw ValidationError("p(n) needs coefficient, exponent >= 1");
  unsigned __int128 v = coefficient;
  for (unsigned i = 0; i < exponent; ++i) {
    v *= n;
    if (v > static_cast<unsigned __int128>(graph::kInfinity / 4)) {
      throw ValidationError("p(n) overflows the weight range");
    }
  }
  return static_cast<Weight>(v);
}

HardInstance build_hard_instance(const graph::WeightedGraph& g, std::size_t k,
                                 std::uint64_t gamma, Polynomial p) {
  const std::size_t n = g.node_count();
  const auto rep = nq::nq_oracle(g, k, gamma);
  const NodeId v = rep.argmax_node;
  const std::size_t d_v = rep.per_node[v].d;
  if (d_v == 0) throw PreconditionError("d_v = 0: the lower bound is trivial here");
  const auto hops = graph::hop_distances(g, v);
  std::size_t ball = 0;
  for (const auto h : hops) ball += (h + 1 <= d_v) ? 1 : 0;
  const std::size_t n_prime = n - ball;
  if (n_prime < 8) {
    throw PreconditionError("only " + std::to_string(n_prime) + " nodes lie outside B(v" +
                            std::to_string(v + 1) + ", " + std::to_string(d_v - 1) +
                            "); at least 8 are needed");
  }
  auto tree = bfs_tree(g, v);

  std::vector<Piece> set1;
  std::vector<Piece> set2;
  std::optional<NodeId> split;
  std::vector<Piece> roots;
  for (NodeId u = 0; u < n; ++u) {
    if (hops[u] == d_v) roots.push_back({u, tree.subtree_size[u]});
  }
  const auto big = std::find_if(roots.begin(), roots.end(),
                                [&](const Piece& r) { return 2 * r.size > n_prime; });
  // Takes unused pieces in order until the group holds a quarter of `whole`
  // (or every remaining piece when take_all is set).
  auto fill = [](std::vector<Piece>& pool, std::vector<bool>& used, std::size_t whole,
                 bool take_all) {
    std::vector<Piece> group;
    std::size_t sum = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      if (!take_all && 4 * sum >= whole) break;
      used[i] = true;
      group.push_back(pool[i]);
      sum += pool[i].size;
    }
    return group;
  };
  if (big == roots.end()) {
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size() && set2.empty(); ++i) {
      if (4 * roots[i].size < n_prime) continue;
      used[i] = true;
      (set1.empty() ? set1 : set2).push_back(roots[i]);
    }
    if (set1.empty()) set1 = fill(roots, used, n_prime, false);
    if (set2.empty()) set2 = fill(roots, used, n_prime, false);
  } else {
    const NodeId r = big->root;
    const std::size_t ni = big->size;
    const NodeId x = splitting_node(tree, r);
    split = x;
    std::vector<Piece> kids;
    for (const auto c : tree.children[x]) kids.push_back({c, tree.subtree_size[c]});
    const std::size_t above = ni - tree.subtree_size[x];
    if (above > 0 && 4 * above >= ni) set1.push_back({r, above, true});
    std::vector<bool> used(kids.size(), false);
    for (std::size_t i = 0; i < kids.size() && set2.empty(); ++i) {
      if (4 * kids[i].size < ni) continue;
      used[i] = true;
      (set1.empty() ? set1 : set2).push_back(kids[i]);
    }
    if (set1.empty()) set1 = fill(kids, used, ni, false);
    if (set2.empty()) set2 = fill(kids, used, ni, true);
  }

  auto nodes_of = [&](const std::vector<Piece>& group) {
    std::vector<NodeId> out;
    for (const auto& piece : group) {
      const auto part = collect_subtree(tree, piece.root, piece.parent_side ? *split : kNoNode);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  };
  auto v1 = nodes_of(set1);
  auto v2 = nodes_of(set2);
  // The splitting node reaches v without crossing E', so it joins V1.
  if (split) v1.push_back(*split);
  std::sort(v1.begin(), v1.end());
  std::sort(v2.begin(), v2.end());

  std::vector<std::uint32_t> e_prime;
  for (const auto& piece : set2) e_prime.push_back(*g.edge_between(piece.root, tree.parent[piece.root]));
  std::sort(e_prime.begin(), e_prime.end());

  const Weight np = static_cast<Weight>(n) * p.at(n);
  std::vector<bool> in_tree(g.edge_count(), false);
  for (NodeId u = 0; u < n; ++u) {
    if (u != v) in_tree[*g.edge_between(u, tree.parent[u])] = true;
  }
  std::vector<Weight> weights(g.edge_count());
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
    if (std::binary_search(e_prime.begin(), e_prime.end(), e)) {
      weights[e] = np;
    } else {
      weights[e] = in_tree[e] ? 1 : np + static_cast<Weight>(n);
    }
  }
  const Weight w_max = np + static_cast<Weight>(n);

  const std::size_t k_prime = std::min({(k + 15) / 16, v1.size(), v2.size()});
  std::vector<std::pair<NodeId, NodeId>> pairing;
  for (std::size_t i = 0; i < k_prime; ++i) pairing.emplace_back(v1[i], v2[i]);

  return HardInstance{g.with_weights(weights, w_max, kappa_for(n, w_max)),
                      v,
                      d_v,
                      n_prime,
                      std::move(v1),
                      std::move(v2),
                      std::move(e_prime),
                      std::move(weights),
                      p,
                      np,
                      std::move(pairing),
                      k_prime,
                      split,
                      std::move(tree)};
}

nlohmann::json sidecar_json(const HardInstance& inst) {
  auto ids = [](const std::vector<NodeId>& nodes) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto u : nodes) a.push_back(graph::external_id(u));
    return a;
  };
  nlohmann::json e_prime = nlohmann::json::array();
  for (const auto e : inst.e_prime) {
    const auto& edge = inst.graph.edges()[e];
    e_prime.push_back({graph::external_id(edge.u), graph::external_id(edge.v)});
  }
  nlohmann::json pairing = nlohmann::json::array();
  for (const auto& [a, b] : inst.pairing) {
    pairing.push_back({graph::external_id(a), graph::external_id(b)});
  }
  return {{"v", graph::external_id(inst.v)},
          {"d_v", inst.d_v},
          {"n_prime", inst.n_prime},
          {"V1", ids(inst.v1)},
          {"V2", ids(inst.v2)},
          {"E_prime", std::move(e_prime)},
          {"pairing", std::move(pairing)},
          {"k_prime", inst.k_prime},
          {"p_poly", {{"coefficient", inst.p.coefficient}, {"exponent", inst.p.exponent}}},
          {"threshold", inst.threshold}};
}

SourceEncoding encode_sources(const HardInstance& inst, const std::vector<std::uint8_t>& x) {
  if (x.size() != inst.k_prime) {
    throw ValidationError("bit string has length " + std::to_string(x.size()) + ", expected " +
                          std::to_string(inst.k_prime));
  }
  SourceEncoding enc;
  enc.bits = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) throw ValidationError("bit string entries must be 0 or 1");
    enc.sources.push_back(x[i] == 0 ? inst.pairing[i].first : inst.pairing[i].second);
  }
  return enc;
}

Decoded decode_from_distances(const std::map<NodeId, Weight>& labels, const HardInstance& inst) {
  Decoded out;
  out.bits.assign(inst.k_prime, 0);
  for (std::size_t i = 0; i < inst.k_prime; ++i) {
    const auto a = labels.find(inst.pairing[i].first);
    const auto b = labels.find(inst.pairing[i].second);
    if ((a == labels.end()) == (b == labels.end())) {
      out.ambiguous.push_back(i);
      continue;
    }
    const Weight d = (a != labels.end() ? a : b)->second;
    if (d == inst.threshold) {
      out.ambiguous.push_back(i);
      continue;
    }
    out.bits[i] = d < inst.threshold ? 0 : 1;
  }
  return out;
}

LowerBoundValue lb_value(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma) {
  const auto rep = nq::nq_oracle(g, k, gamma);
  LowerBoundValue out;
  out.v = rep.argmax_node;
  out.d_v = rep.per_node[out.v].d;
  out.chain = rep.value - Rational(1);
  if (out.d_v == 0) {
    out.trivial = true;
    return out;
  }
  const auto prof = graph::neighborhood_profile(g, out.v);
  out.ball = prof.at(out.d_v - 1);
  out.volume_term = Rational(static_cast<std::int64_t>((k + 15) / 16),
                             static_cast<std::int64_t>(out.ball * gamma));
  out.distance_term = Rational(static_cast<std::int64_t>(out.d_v) - 1, 2) - Rational(1);
  out.trivial = out.distance_term <= Rational(0);
  out.value = out.trivial ? Rational(0) : min(out.volume_term, out.distance_term);
  return out;
}

std::vector<NodeId> audit_ball(const HardInstance& inst) {
  const std::size_t h = inst.d_v - 1;
  std::vector<NodeId> ball;
  if (h == 0) return ball;
  const auto hops = graph::hop_distances(inst.graph, inst.v);
  for (NodeId u = 0; u < hops.size(); ++u) {
    if (hops[u] + 1 <= h) ball.push_back(u);
  }
  return ball;
}

std::uint64_t bits_into_ball(const sim::ExecutionTrace& trace, const HardInstance& inst) {
  std::vector<bool> members(inst.graph.node_count(), false);
  for (const auto u : audit_ball(inst)) members[u] = true;
  return trace.bits_received_by(members);
}

AuditReport audit_information_flow(const std::vector<std::uint64_t>& bits_per_run,
                                   const std::vector<bool>& success, const HardInstance& inst,
                                   std::uint64_t gamma_bits) {
  if (bits_per_run.size() != success.size() || bits_per_run.empty()) {
    throw ValidationError("audit needs one success flag per run and at least one run");
  }
  AuditReport r;
  r.ball = audit_ball(inst);
  r.h = inst.d_v - 1;
  r.runs = bits_per_run.size();
  r.bits_per_run = bits_per_run;
  std::uint64_t total = 0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < r.runs; ++i) {
    total += bits_per_run[i];
    ok += success[i] ? 1 : 0;
  }
  const auto runs = static_cast<std::int64_t>(r.runs);
  r.mean_bits = Rational(static_cast<std::int64_t>(total), runs);
  r.success_rate = Rational(static_cast<std::int64_t>(ok), runs);
  r.entropy = inst.k_prime;
  r.transcript_bound =
      r.success_rate * Rational(static_cast<std::int64_t>(r.entropy)) - Rational(1);
  const Rational distance_term =
      Rational(static_cast<std::int64_t>(r.h), 2) - Rational(1);
  r.vacuous = distance_term <= Rational(0);
  r.round_bound = distance_term;
  if (!r.ball.empty()) {
    const Rational volume_term =
        r.transcript_bound /
        Rational(static_cast<std::int64_t>(r.ball.size() * gamma_bits));
    r.round_bound = min(volume_term, distance_term);
  }
  r.holds = r.mean_bits >= r.transcript_bound;
  return r;
}

AuditReport audit_information_flow(const std::vector<sim::ExecutionTrace>& traces,
                                   const std::vector<bool>& success, const HardInstance& inst,
                                   std::uint64_t gamma_bits) {
  std::vector<std::uint64_t> bits;
  for (const auto& t : traces) bits.push_back(bits_into_ball(t, inst));
  return audit_information_flow(bits, success, inst, gamma_bits);
}

nlohmann::json to_json(const AuditReport& r) {
  auto rat = [](const Rational& q) { return nlohmann::json::array({q.num(), q.den()}); };
  nlohmann::json ball = nlohmann::json::array();
  for (const auto u : r.ball) ball.push_back(graph::external_id(u));
  return {{"ball", std::move(ball)},
          {"h", r.h},
          {"runs", r.runs},
          {"bits_per_run", r.bits_per_run},
          {"mean_bits", rat(r.mean_bits)},
          {"success_rate", rat(r.success_rate)},
          {"entropy", r.entropy},
          {"transcript_bound", rat(r.transcript_bound)},
          {"round_bound", rat(r.round_bound)},
          {"vacuous", r.vacuous},
          {"holds", r.holds}};
}

DecodeExperiment run_decode_experiment(const HardInstance& inst, std::size_t runs,
                                       std::uint64_t gamma, const sim::SimConfig& config) {
  if (runs == 0) throw ValidationError("need at least one run");
  // With d_v = 1 every V2 node sits at exactly n p(n), which decodes as ambiguous.
  if (inst.d_v < 2) throw PreconditionError("decoding needs d_v >= 2");
  std::vector<bool> members(inst.graph.node_count(), false);
  for (const auto u : audit_ball(inst)) members[u] = true;

  DecodeExperiment out;
  out.trials.resize(runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        auto& trial = out.trials[r];
        Rng rng(derive_seed(config.seed, "hard_x", r));
        trial.x.resize(inst.k_prime);
        for (auto& b : trial.x) b = static_cast<std::uint8_t>(rng.uniform(2));
        const auto enc = encode_sources(inst, trial.x);
        sp::SPInstance si;
        si.sources = enc.sources;
        si.targets = {inst.v};
        sp::SPOptions opt;
        opt.gamma = gamma;
        opt.mode = sp::DistanceMode::exact;
        sim::SimConfig cfg = config;
        cfg.seed = derive_seed(config.seed, "hard_run", r);
        sim::ExecutionTrace ta;
        sim::ExecutionTrace tb;
        const auto res = sp::solve_k_ell_sp(inst.graph, si, opt, cfg, &ta, &tb);
        std::map<NodeId, Weight> labels;
        for (const auto& [t, s, d] : res.labels) {
          if (t == inst.v) labels[s] = d;
        }
        const auto dec = decode_from_distances(labels, inst);
        trial.decoded = dec.bits;
        trial.success = dec.ok() && dec.bits == trial.x;
        trial.bits_into_ball = ta.bits_received_by(members) + tb.bits_received_by(members);
        trial.rounds = res.rounds_phase_a + res.rounds_phase_b;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(runs, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> bits;
  std::vector<bool> success;
  for (const auto& t : out.trials) {
    bits.push_back(t.bits_into_ball);
    success.push_back(t.success);
  }
  out.audit = audit_information_flow(bits, success, inst, config.gamma_bits);
  return out;
}

}  // namespace hybrid::lower_bound
