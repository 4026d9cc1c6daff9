#include "hybrid/comm.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "hybrid/bits.hpp"

namespace hybrid::comm {

namespace {

void check_fits(const sim::Network& net, const Fields& f) {
  const std::uint32_t width = net.field_bits();
  for (const auto x : f) {
    if (width < 64 && (x >> width) != 0) {
      throw ValidationError("aggregate value " + std::to_string(x) + " wider than " +
                            std::to_string(width) + " bits");
    }
  }
  if (static_cast<std::uint64_t>(width) * f.size() > net.config().gamma_bits) {
    throw ValidationError("aggregate message of " + std::to_string(width * f.size()) +
                          " bits exceeds gamma");
  }
}

}  // namespace

Fields aggregate_fields(sim::Network& net, std::vector<Fields> values, const Combiner& op) {
  const std::size_t n = net.node_count();
  if (values.size() != n) throw ValidationError("one aggregate value per node required");
  if (n == 1) return values[0];
  for (const auto& v : values) check_fits(net, v);
  const std::uint32_t bits = net.field_bits() * static_cast<std::uint32_t>(values[0].size());
  const std::size_t p = std::size_t{1} << floor_log2(n);

  auto exchange = [&](auto&& partner_of) {
    for (sim::NodeId v = 0; v < n; ++v) {
      const auto partner = partner_of(v);
      if (partner) net.send_global(v, *partner, values[v], bits);
    }
    const auto in = net.step();
    for (sim::NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.global[v]) values[v] = op(values[v], m.fields);
    }
  };

  if (n > p) {
    exchange([&](sim::NodeId v) -> std::optional<sim::NodeId> {
      if (v >= p) return static_cast<sim::NodeId>(v - p);
      return std::nullopt;
    });
  }
  for (std::size_t bit = 1; bit < p; bit <<= 1) {
    exchange([&](sim::NodeId v) -> std::optional<sim::NodeId> {
      if (v < p) return static_cast<sim::NodeId>(v ^ bit);
      return std::nullopt;
    });
  }
  if (n > p) {
    // Folded nodes take their partner's final value.
    for (sim::NodeId v = 0; v + p < n; ++v) {
      net.send_global(v, static_cast<sim::NodeId>(v + p), values[v], bits);
    }
    const auto in = net.step();
    for (sim::NodeId v = static_cast<sim::NodeId>(p); v < n; ++v) {
      values[v] = in.global[v].at(0).fields;
    }
  }
  for (sim::NodeId v = 1; v < n; ++v) {
    if (values[v] != values[0]) throw std::logic_error("aggregate did not converge");
  }
  return values[0];
}

std::uint64_t aggregate(sim::Network& net, const std::vector<std::uint64_t>& values,
                        AggregateOp op) {
  std::vector<Fields> wrapped;
  wrapped.reserve(values.size());
  for (const auto x : values) wrapped.push_back({x});
  const Combiner combine = [op](const Fields& a, const Fields& b) -> Fields {
    return {op == AggregateOp::max ? std::max(a[0], b[0]) : a[0] + b[0]};
  };
  return aggregate_fields(net, std::move(wrapped), combine)[0];
}

AggregateRun aggregate(const graph::WeightedGraph& g, const std::vector<std::uint64_t>& values,
                       AggregateOp op, const sim::SimConfig& config) {
  AggregateRun run;
  sim::Network net(g, config, &run.trace);
  net.set_phase("aggregate");
  run.value = aggregate(net, values, op);
  run.rounds = net.rounds_executed();
  return run;
}

BroadcastResult broadcast_set(sim::Network& net, const std::vector<std::vector<Item>>& holders,
                              std::size_t ell, std::uint32_t item_bits) {
  const std::size_t n = net.node_count();
  if (holders.size() != n) throw ValidationError("one holder set per node required");
  {
    std::unordered_set<std::uint64_t> keys;
    for (const auto& h : holders) {
      for (const auto& it : h) keys.insert(it.key);
    }
    if (keys.size() != ell) {
      throw ValidationError("broadcast holds " + std::to_string(keys.size()) +
                            " distinct items, expected " + std::to_string(ell));
    }
  }
  BroadcastResult result;
  result.known.resize(n);
  if (ell == 0) return result;

  const std::uint64_t gamma = net.config().gamma_bits;
  if (item_bits > gamma) throw ValidationError("broadcast item wider than gamma");
  const std::uint32_t l = log_n(n);
  const std::size_t per_round =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(gamma / (2 * l), gamma / item_bits));
  const std::size_t start = net.rounds_executed();

  // order[v]: items in the order v learned them; seen[v]: their keys.
  std::vector<std::vector<Item>> order(n);
  std::vector<std::unordered_set<std::uint64_t>> seen(n);
  std::vector<std::size_t> cursor(n, 0);
  for (sim::NodeId v = 0; v < n; ++v) {
    for (const auto& it : holders[v]) {
      if (seen[v].insert(it.key).second) order[v].push_back(it);
    }
  }

  auto all_known = [&] {
    std::vector<std::uint64_t> counts(n);
    for (sim::NodeId v = 0; v < n; ++v) counts[v] = order[v].size();
    return aggregate(net, counts, AggregateOp::sum) == n * ell;
  };

  const std::size_t max_gossip = 64 * (ell + 1) * l * l;
  std::size_t gossip_rounds = 0;
  std::vector<sim::NodeId> perm(n);
  while (!all_known()) {
    for (std::uint32_t r = 0; r < l; ++r) {
      if (gossip_rounds++ >= max_gossip) {
        throw RoundCapExceeded("broadcast did not complete within " +
                               std::to_string(max_gossip) + " gossip rounds");
      }
      // Public per-round permutation: every node receives exactly one push.
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(derive_seed(net.config().seed, "gossip", net.rounds_executed()));
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform(i)]);
      for (sim::NodeId v = 0; v < n; ++v) {
        const auto& mine = order[v];
        if (mine.empty() || perm[v] == v) continue;
        const std::size_t count = std::min(per_round, mine.size());
        for (std::size_t i = 0; i < count; ++i) {
          const Item& it = mine[(cursor[v] + i) % mine.size()];
          net.send_global(v, perm[v], {it.key, it.value}, item_bits);
        }
        cursor[v] = (cursor[v] + count) % mine.size();
      }
      const auto in = net.step();
      for (sim::NodeId v = 0; v < n; ++v) {
        for (const auto& m : in.global[v]) {
          if (seen[v].insert(m.fields[0]).second) order[v].push_back({m.fields[0], m.fields[1]});
        }
      }
    }
  }
  for (sim::NodeId v = 0; v < n; ++v) {
    result.known[v] = order[v];
    std::sort(result.known[v].begin(), result.known[v].end(),
              [](const Item& a, const Item& b) { return a.key < b.key; });
  }
  result.rounds = net.rounds_executed() - start;
  return result;
}

}  // namespace hybrid::comm
