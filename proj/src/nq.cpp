#include "hybrid/nq.hpp"

#include <algorithm>

#include "hybrid/comm.hpp"
#include "hybrid/errors.hpp"

namespace hybrid::nq {

namespace {

void check_inputs(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma) {
  if (k < 1 || k > g.node_count()) throw ValidationError("k must be in [1, n]");
  if (gamma < 1) throw ValidationError("gamma must be at least 1");
}

NodeId argmax(const std::vector<NodeQuality>& per_node) {
  NodeId best = 0;
  for (NodeId v = 1; v < per_node.size(); ++v) {
    if (per_node[v].value > per_node[best].value) best = v;
  }
  return best;
}

}  // namespace

Rational quality_term(std::size_t k, std::uint64_t gamma, std::size_t ball, std::size_t d) {
  const Rational load(static_cast<std::int64_t>(k),
                      static_cast<std::int64_t>(ball) * static_cast<std::int64_t>(gamma));
  return max(load, Rational(static_cast<std::int64_t>(d)));
}

NodeQuality nq_from_profile(const graph::NeighborhoodProfile& p, std::size_t diameter,
                            std::size_t k, std::uint64_t gamma) {
  const std::size_t top = std::max<std::size_t>(1, diameter);
  NodeQuality best{quality_term(k, gamma, p.at(1), 1), 1};
  for (std::size_t d = 2; d <= top; ++d) {
    const Rational q = quality_term(k, gamma, p.at(d), d);
    if (q < best.value) best = {q, d};
  }
  return best;
}

NodeQuality nq_node_oracle(const graph::WeightedGraph& g, NodeId v, std::size_t k,
                           std::uint64_t gamma) {
  check_inputs(g, k, gamma);
  if (v >= g.node_count()) throw ValidationError("unknown node");
  return nq_from_profile(graph::neighborhood_profile(g, v), graph::hop_diameter(g), k, gamma);
}

NQReport nq_oracle(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma) {
  check_inputs(g, k, gamma);
  const auto profiles = graph::all_neighborhood_profiles(g);
  std::size_t diameter = 0;
  for (const auto& p : profiles) diameter = std::max(diameter, p.sizes.size() - 1);
  const std::size_t top = std::max<std::size_t>(1, diameter);

  NQReport r;
  r.k = k;
  r.gamma = gamma;
  for (std::size_t d = 1; d <= top; ++d) {
    std::size_t smallest = g.node_count();
    for (const auto& p : profiles) smallest = std::min(smallest, p.at(d));
    const Rational q = quality_term(k, gamma, smallest, d);
    if (d == 1 || q < r.value) {
      r.value = q;
      r.d_star = d;
    }
  }
  r.per_node.reserve(profiles.size());
  for (const auto& p : profiles) r.per_node.push_back(nq_from_profile(p, diameter, k, gamma));
  r.argmax_node = argmax(r.per_node);
  return r;
}

NQReport nq_distributed(sim::Network& net, std::size_t k, std::uint64_t gamma) {
  const auto& g = net.graph();
  check_inputs(g, k, gamma);
  const std::size_t n = g.node_count();
  const std::size_t start = net.rounds_executed();
  net.set_phase("nq");

  // Per-node state: the ball learned so far and the IDs added last round.
  std::vector<std::vector<bool>> in_ball(n, std::vector<bool>(n, false));
  std::vector<std::vector<std::uint64_t>> fresh(n);
  std::vector<std::vector<std::size_t>> sizes(n);  // sizes[v][d] = |B(v, d)|
  for (NodeId v = 0; v < n; ++v) {
    in_ball[v][v] = true;
    fresh[v] = {v};
    sizes[v] = {1};
  }
  std::size_t local_rounds = 0;

  auto expand = [&] {
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& a : g.neighbors(v)) net.send_local(v, a.to, fresh[v]);
    }
    const auto in = net.step();
    ++local_rounds;
    for (NodeId v = 0; v < n; ++v) {
      fresh[v].clear();
      for (const auto& m : in.local[v]) {
        for (const auto id : m.words) {
          if (!in_ball[v][id]) {
            in_ball[v][id] = true;
            fresh[v].push_back(id);
          }
        }
      }
      std::sort(fresh[v].begin(), fresh[v].end());
      sizes[v].push_back(sizes[v].back() + fresh[v].size());
    }
  };

  // Fields: numerator, denominator, incomplete flag.
  const comm::Combiner max_term = [](const comm::Fields& a, const comm::Fields& b) {
    const Rational x(static_cast<std::int64_t>(a[0]), static_cast<std::int64_t>(a[1]));
    const Rational y(static_cast<std::int64_t>(b[0]), static_cast<std::int64_t>(b[1]));
    const auto& hi = x < y ? b : a;
    return comm::Fields{hi[0], hi[1], a[2] | b[2]};
  };
  struct Measure {
    Rational value;
    bool complete;
  };
  auto measure = [&](std::size_t d) {
    std::vector<comm::Fields> values(n);
    for (NodeId v = 0; v < n; ++v) {
      const Rational q = quality_term(k, gamma, sizes[v][d], d);
      values[v] = {static_cast<std::uint64_t>(q.num()), static_cast<std::uint64_t>(q.den()),
                   sizes[v][d] < n ? 1u : 0u};
    }
    const auto f = comm::aggregate_fields(net, std::move(values), max_term);
    return Measure{Rational(static_cast<std::int64_t>(f[0]), static_cast<std::int64_t>(f[1])),
                   f[2] == 0};
  };

  expand();
  Measure current = measure(1);
  std::size_t d = 1;
  while (!current.complete) {
    expand();
    const Measure next = measure(d + 1);
    if (current.value <= next.value) break;
    current = next;
    ++d;
  }
  const std::size_t explored = sizes[0].size() - 1;
  // Every node's own minimization; radii past what was explored cannot win.
  NQReport r;
  r.k = k;
  r.gamma = gamma;
  r.value = current.value;
  r.d_star = d;
  r.per_node.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    NodeQuality best{quality_term(k, gamma, sizes[v][1], 1), 1};
    for (std::size_t e = 2; e <= explored; ++e) {
      const Rational q = quality_term(k, gamma, sizes[v][e], e);
      if (q < best.value) best = {q, e};
    }
    r.per_node[v] = best;
  }

  // Publish argmax: (num, den, id), larger value wins, smaller id on ties.
  const comm::Combiner arg = [](const comm::Fields& a, const comm::Fields& b) {
    const Rational x(static_cast<std::int64_t>(a[0]), static_cast<std::int64_t>(a[1]));
    const Rational y(static_cast<std::int64_t>(b[0]), static_cast<std::int64_t>(b[1]));
    if (x != y) return x < y ? b : a;
    return a[2] < b[2] ? a : b;
  };
  std::vector<comm::Fields> values(n);
  for (NodeId v = 0; v < n; ++v) {
    values[v] = {static_cast<std::uint64_t>(r.per_node[v].value.num()),
                 static_cast<std::uint64_t>(r.per_node[v].value.den()), v};
  }
  const auto top = comm::aggregate_fields(net, std::move(values), arg);
  r.argmax_node = static_cast<NodeId>(top[2]);
  r.rounds_local = local_rounds;
  r.rounds_total = net.rounds_executed() - start;
  r.rounds_global = r.rounds_total - local_rounds;
  return r;
}

NQReport nq_distributed(const graph::WeightedGraph& g, std::size_t k, std::uint64_t gamma,
                        const sim::SimConfig& config, sim::ExecutionTrace* trace) {
  sim::Network net(g, config, trace);
  return nq_distributed(net, k, gamma);
}

nlohmann::json to_json(const NQReport& r) {
  nlohmann::json per_node = nlohmann::json::array();
  for (NodeId v = 0; v < r.per_node.size(); ++v) {
    const auto& q = r.per_node[v];
    per_node.push_back({graph::external_id(v), q.value.num(), q.value.den(), q.d});
  }
  return {{"nq_num", r.value.num()},
          {"nq_den", r.value.den()},
          {"d_star", r.d_star},
          {"argmax_node", graph::external_id(r.argmax_node)},
          {"k", r.k},
          {"gamma", r.gamma},
          {"rounds", {{"local", r.rounds_local}, {"global", r.rounds_global},
                      {"combined", r.rounds_total}}},
          {"per_node", std::move(per_node)}};
}

}  // namespace hybrid::nq
