#include "hybrid/routing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "hybrid/bits.hpp"
#include "hybrid/comm.hpp"
#include "hybrid/errors.hpp"

namespace hybrid::routing {

namespace {

constexpr std::uint64_t kTokenTag = 0;
constexpr std::uint64_t kRequestTag = 1;
constexpr std::uint64_t kResponseTag = 2;
constexpr std::uint64_t kFlagEmpty = 1;
constexpr std::uint64_t kFlagLast = 2;
constexpr std::uint32_t kTagBits = 2;

// Bit width of the coefficients as they travel in the seed broadcast.
constexpr std::uint32_t kCoefficientBits = 61;

std::uint32_t bit_width_of(std::uint64_t x) {
  return x == 0 ? 1 : static_cast<std::uint32_t>(std::bit_width(x));
}

// Global sends with a loopback: a node never messages itself over the
// network; such messages are handed over at the next step without cost.
class Mailer {
 public:
  explicit Mailer(sim::Network& net) : net_(net) {}

  // Returns true if the message used the network.
  bool post(NodeId src, NodeId dst, std::vector<std::uint64_t> fields, std::uint32_t bits) {
    if (src == dst) {
      self_next_[dst].push_back(std::move(fields));
      return false;
    }
    net_.send_global(src, dst, std::move(fields), bits);
    return true;
  }

  // inbox[v]: field vectors of every message v receives this round.
  std::vector<std::vector<std::vector<std::uint64_t>>> step() {
    auto in = net_.step();
    std::vector<std::vector<std::vector<std::uint64_t>>> out(net_.node_count());
    for (NodeId v = 0; v < out.size(); ++v) {
      max_messages_ = std::max(max_messages_, in.global[v].size());
      for (auto& m : in.global[v]) out[v].push_back(std::move(m.fields));
      for (auto& f : self_next_[v]) out[v].push_back(std::move(f));
    }
    self_next_.clear();
    return out;
  }

  std::size_t max_messages() const { return max_messages_; }

 private:
  sim::Network& net_;
  std::map<NodeId, std::vector<std::vector<std::uint64_t>>> self_next_;
  std::size_t max_messages_ = 0;
};

// True when every node reports it is done (sum of busy flags is zero).
bool barrier(sim::Network& net, const std::vector<bool>& busy) {
  std::vector<std::uint64_t> flags(busy.begin(), busy.end());
  return comm::aggregate(net, flags, comm::AggregateOp::sum) == 0;
}

}  // namespace

double load_constant(double c) { return 1.0 + 3.0 * c; }

std::size_t batch_size(std::uint64_t gamma_bits, std::size_t n) {
  const std::uint64_t l = log_n(n);
  return static_cast<std::size_t>(std::max<std::uint64_t>(1, gamma_bits / (8 * l * l)));
}

std::uint64_t RoutingPlan::bin_of(NodeId source) const {
  return hash::eval_range(g_spec, g_seed, graph::external_id(source), k);
}

NodeId RoutingPlan::intermediate(std::uint64_t i, std::uint64_t j, std::size_t n) const {
  return static_cast<NodeId>(hash::eval_range(h_spec, h_seed, pack(i, j), n));
}

std::pair<std::size_t, std::size_t> RoutingPlan::task_block(std::size_t j, std::size_t pos) const {
  const std::size_t h = helpers_of.at(j).size();
  const std::size_t base = k / h;
  const std::size_t extra = k % h;
  const std::size_t begin = pos * base + std::min(pos, extra);
  return {begin, begin + base + (pos < extra ? 1 : 0)};
}

bool within_hypothesis(TargetMode mode, std::size_t ell, const Rational& nq, std::size_t n) {
  if (mode == TargetMode::iid) return Rational(static_cast<std::int64_t>(ell)) <= nq;
  const std::size_t l = log_n(n);
  return ell <= l * l;
}

RoutingPlan plan_routing(sim::Network& net, const std::vector<NodeId>& sources,
                         const std::vector<NodeId>& targets, const ruling::HelperFamily& helpers) {
  const std::size_t n = net.node_count();
  const std::uint32_t f = net.field_bits();
  const std::size_t start = net.rounds_executed();
  net.set_phase("route_plan");

  std::vector<bool> is_source(n, false), is_target(n, false);
  for (const auto s : sources) is_source.at(s) = true;
  for (const auto t : targets) is_target.at(t) = true;

  RoutingPlan plan;
  plan.k = comm::aggregate(net, std::vector<std::uint64_t>(is_source.begin(), is_source.end()),
                           comm::AggregateOp::sum);
  const std::size_t ell = comm::aggregate(
      net, std::vector<std::uint64_t>(is_target.begin(), is_target.end()), comm::AggregateOp::sum);
  if (plan.k == 0 || ell == 0) throw ValidationError("routing needs sources and targets");

  // Everyone learns the target IDs, hence the order t_1 < ... < t_ell.
  std::vector<std::vector<comm::Item>> holders(n);
  for (NodeId v = 0; v < n; ++v) {
    if (is_target[v]) holders[v].push_back({graph::external_id(v), 0});
  }
  const auto known_targets = comm::broadcast_set(net, holders, ell, f);
  for (const auto& it : known_targets.known[0]) {
    plan.targets.push_back(static_cast<NodeId>(it.key - 1));
  }

  plan.batch = batch_size(net.config().gamma_bits, n);
  plan.pack_shift = ceil_log2(ell + 1);
  const double ln_n = std::log(static_cast<double>(n));
  const auto independence = static_cast<std::uint32_t>(std::max<double>(
      {1.0, static_cast<double>(plan.batch), std::ceil(static_cast<double>(ell) * ln_n)}));
  plan.h_spec.domain_bits = bit_width_of(plan.pack(plan.k - 1, ell - 1));
  plan.h_spec.range_bits = bit_width_of(n - 1);
  plan.h_spec.independence = independence;
  plan.g_spec.domain_bits = bit_width_of(n);
  plan.g_spec.range_bits = bit_width_of(plan.k - 1);
  plan.g_spec.independence = independence;

  // Node 1 draws both seeds and broadcasts the coefficients.
  Rng rng = net.node_rng(0, "hash_seeds");
  const auto h_seed = hash::sample_seed(plan.h_spec, rng);
  const auto g_seed = hash::sample_seed(plan.g_spec, rng);
  std::vector<std::vector<comm::Item>> seed_items(n);
  for (std::uint32_t i = 0; i < independence; ++i) {
    seed_items[0].push_back({i, h_seed.coefficients[i]});
    seed_items[0].push_back({independence + i, g_seed.coefficients[i]});
  }
  const auto known_seeds =
      comm::broadcast_set(net, seed_items, 2 * std::size_t{independence}, f + kCoefficientBits);
  const auto& mine = known_seeds.known[0];
  for (std::uint32_t i = 0; i < independence; ++i) {
    plan.h_seed.coefficients.push_back(mine[i].value);
    plan.g_seed.coefficients.push_back(mine[independence + i].value);
  }
  for (NodeId v = 1; v < n; ++v) {
    if (known_seeds.known[v] != mine || known_targets.known[v] != known_targets.known[0]) {
      throw std::logic_error("broadcast views differ");
    }
  }

  for (const auto t : plan.targets) {
    const auto it = helpers.helpers.find(t);
    if (it == helpers.helpers.end() || it->second.empty()) {
      plan.helpers_of.push_back({t});
    } else {
      plan.helpers_of.push_back(it->second);
    }
  }
  plan.cluster_depth = helpers.clusters.max_depth;
  plan.tree_parent = helpers.clusters.parent;
  plan.down_route = helpers.down_route;
  if (plan.tree_parent.empty()) {
    // No clustering (every target is its own helper): trivial trees.
    plan.tree_parent.resize(n);
    for (NodeId v = 0; v < n; ++v) plan.tree_parent[v] = v;
    plan.down_route.assign(n, {});
  }
  plan.rounds = net.rounds_executed() - start;
  return plan;
}

DeliveryReport route_tokens(sim::Network& net, const RoutingPlan& plan,
                            const std::vector<Token>& tokens) {
  const std::size_t n = net.node_count();
  const std::uint32_t f = net.field_bits();
  const std::uint64_t cap = net.config().gamma_bits;
  const std::size_t ell = plan.targets.size();
  const std::size_t b = plan.batch;
  const std::size_t start = net.rounds_executed();
  const std::uint32_t token_bits = 3 * f + kTagBits;
  const std::uint32_t request_bits = 3 * f + kTagBits;
  const std::uint32_t response_bits = 4 * f + kTagBits + 2;

  std::map<NodeId, std::size_t> index_of;
  for (std::size_t j = 0; j < ell; ++j) index_of[plan.targets[j]] = j;

  // outbox[s]: (j, payload) in target order.
  std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> outbox(n);
  std::set<std::pair<NodeId, NodeId>> seen_pairs;
  for (const auto& t : tokens) {
    const auto it = index_of.find(t.target);
    if (t.source >= n || it == index_of.end()) throw ValidationError("token outside the plan");
    if (!seen_pairs.insert({t.source, t.target}).second) {
      throw ValidationError("duplicate token for one (source, target) pair");
    }
    if (f < 64 && (t.payload >> f) != 0) throw ValidationError("token payload wider than a field");
    outbox[t.source].push_back({it->second, t.payload});
  }
  for (auto& o : outbox) std::sort(o.begin(), o.end());

  DeliveryReport report;
  report.batch = b;
  report.seed = net.config().seed;
  const std::uint32_t l = log_n(n);
  report.audit_exempt = cap < 8ull * l * l;
  Mailer mail(net);

  // Phase 1: tokens to intermediates.
  net.set_phase("route_push");
  using Held = std::vector<std::pair<std::uint64_t, std::uint64_t>>;  // (source ID, payload)
  std::vector<std::map<std::uint64_t, Held>> store(n);
  std::size_t pushes = (ell + b - 1) / b;
  for (std::size_t r = 0; r < pushes; ++r) {
    for (NodeId s = 0; s < n; ++s) {
      const auto& mine = outbox[s];
      for (std::size_t x = r * b; x < std::min(mine.size(), (r + 1) * b); ++x) {
        const auto [j, payload] = mine[x];
        const NodeId u = plan.intermediate(plan.bin_of(s), j, n);
        mail.post(s, u, {kTokenTag, graph::external_id(s), j, payload}, token_bits);
      }
    }
    const auto in = mail.step();
    for (NodeId u = 0; u < n; ++u) {
      for (const auto& m : in[u]) {
        const auto src = static_cast<NodeId>(m[1] - 1);
        store[u][plan.pack(plan.bin_of(src), m[2])].push_back({m[1], m[3]});
      }
    }
  }
  barrier(net, std::vector<bool>(n, false));
  for (const auto& s : store) {
    std::size_t held = 0;
    for (const auto& [key, list] : s) held += list.size();
    report.xu_max = std::max(report.xu_max, held);
  }

  // Phases 2 and 3: requests and paced responses.
  net.set_phase("route_collect");
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> tasks(n);  // (i, j)
  for (std::size_t j = 0; j < ell; ++j) {
    const auto& hs = plan.helpers_of[j];
    for (std::size_t pos = 0; pos < hs.size(); ++pos) {
      const auto [lo, hi] = plan.task_block(j, pos);
      for (std::size_t i = lo; i < hi; ++i) tasks[hs[pos]].push_back({i, j});
    }
  }
  struct Active {
    NodeId helper;
    std::uint64_t i, j;
    std::size_t next;
  };
  std::vector<std::deque<Active>> queue(n);
  std::vector<std::size_t> next_task(n, 0), outstanding(n, 0);
  std::vector<std::vector<Held>> collected(n, std::vector<Held>(ell));
  const std::size_t epoch = l;
  for (bool done = false; !done;) {
    for (std::size_t e = 0; e < epoch; ++e) {
      for (NodeId v = 0; v < n; ++v) {
        std::uint64_t budget = cap;
        std::deque<Active> keep;
        while (!queue[v].empty()) {
          Active a = queue[v].front();
          queue[v].pop_front();
          if (a.helper != v && budget < response_bits) {
            keep.push_back(a);
            continue;
          }
          const auto it = store[v].find(plan.pack(a.i, a.j));
          const Held* list = it == store[v].end() ? nullptr : &it->second;
          std::vector<std::uint64_t> msg;
          bool last = true;
          if (list == nullptr || list->empty()) {
            msg = {kResponseTag, 0, a.i, a.j, 0, kFlagEmpty | kFlagLast};
          } else {
            const auto& [src, payload] = (*list)[a.next];
            last = a.next + 1 == list->size();
            msg = {kResponseTag, src, a.i, a.j, payload, last ? kFlagLast : 0};
          }
          if (mail.post(v, a.helper, std::move(msg), response_bits)) budget -= response_bits;
          if (!last) {
            ++a.next;
            keep.push_back(a);
          }
        }
        queue[v] = std::move(keep);
        while (outstanding[v] < b && next_task[v] < tasks[v].size()) {
          const auto [i, j] = tasks[v][next_task[v]];
          const NodeId u = plan.intermediate(i, j, n);
          if (u != v && budget < request_bits) break;
          if (mail.post(v, u, {kRequestTag, graph::external_id(v), i, j}, request_bits)) {
            budget -= request_bits;
          }
          ++outstanding[v];
          ++next_task[v];
        }
      }
      const auto in = mail.step();
      for (NodeId v = 0; v < n; ++v) {
        for (const auto& m : in[v]) {
          if (m[0] == kRequestTag) {
            queue[v].push_back({static_cast<NodeId>(m[1] - 1), m[2], m[3], 0});
          } else {
            if ((m[5] & kFlagEmpty) == 0) collected[v][m[3]].push_back({m[1], m[4]});
            if ((m[5] & kFlagLast) != 0) --outstanding[v];
          }
        }
      }
    }
    std::vector<bool> busy(n);
    for (NodeId v = 0; v < n; ++v) {
      busy[v] = next_task[v] < tasks[v].size() || outstanding[v] > 0 || !queue[v].empty();
    }
    done = barrier(net, busy);
  }
  report.max_rx_messages = mail.max_messages();

  // Phase 4: carry collected tokens to the target along the cluster tree.
  net.set_phase("route_deliver");
  struct Bundle {
    NodeId target;
    Held items;
  };
  std::vector<std::vector<Bundle>> bundles(n);
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < ell; ++j) {
      if (!collected[v][j].empty()) bundles[v].push_back({plan.targets[j], collected[v][j]});
    }
  }
  std::map<NodeId, Held> arrived;
  auto settle = [&] {
    for (NodeId v = 0; v < n; ++v) {
      std::vector<Bundle> moving;
      for (auto& bd : bundles[v]) {
        if (bd.target == v) {
          auto& dst = arrived[v];
          dst.insert(dst.end(), bd.items.begin(), bd.items.end());
        } else {
          moving.push_back(std::move(bd));
        }
      }
      bundles[v] = std::move(moving);
    }
  };
  settle();
  for (std::size_t r = 0; r < 2 * plan.cluster_depth; ++r) {
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& bd : bundles[v]) {
        const auto it = plan.down_route[v].find(bd.target);
        const NodeId hop = it != plan.down_route[v].end() ? it->second : plan.tree_parent[v];
        std::vector<std::uint64_t> words = {bd.target};
        for (const auto& [src, payload] : bd.items) {
          words.push_back(src);
          words.push_back(payload);
        }
        net.send_local(v, hop, std::move(words));
      }
      bundles[v].clear();
    }
    const auto in = net.step();
    for (NodeId v = 0; v < n; ++v) {
      for (const auto& m : in.local[v]) {
        Bundle bd{static_cast<NodeId>(m.words[0]), {}};
        for (std::size_t x = 1; x + 1 < m.words.size(); x += 2) {
          bd.items.push_back({m.words[x], m.words[x + 1]});
        }
        bundles[v].push_back(std::move(bd));
      }
    }
    settle();
  }

  // Completeness against the injected tokens.
  std::map<NodeId, std::set<std::pair<NodeId, std::uint64_t>>> expected;
  for (const auto& t : tokens) expected[t.target].insert({t.source, t.payload});
  for (const auto t : plan.targets) {
    auto& got = report.delivered[t];
    for (const auto& [src, payload] : arrived[t]) {
      got.push_back({static_cast<NodeId>(src - 1), payload});
    }
    std::sort(got.begin(), got.end());
    const std::set<std::pair<NodeId, std::uint64_t>> have(got.begin(), got.end());
    if (have != expected[t] || have.size() != got.size()) {
      std::size_t missing = 0;
      for (const auto& e : expected[t]) missing += have.count(e) == 0 ? 1 : 0;
      throw DeliveryError("target " + std::to_string(graph::external_id(t)) + " is missing " +
                          std::to_string(missing) + " of " + std::to_string(expected[t].size()) +
                          " tokens");
    }
    report.delivered_count += got.size();
  }

  std::vector<std::size_t> bins(plan.k, 0);
  std::vector<bool> is_source(n, false);
  for (const auto& t : tokens) is_source[t.source] = true;
  for (NodeId s = 0; s < n; ++s) {
    if (is_source[s]) report.yi_max = std::max(report.yi_max, ++bins[plan.bin_of(s)]);
  }
  report.rounds_total = net.rounds_executed() - start;
  report.rounds_local = net.local_rounds_since(start);
  report.rounds_global = net.global_rounds_since(start);
  report.max_rx_bits = net.max_rx_bits_since(start);
  return report;
}

RouteRun run_routing(sim::Network& net, const RouteRequest& request) {
  const std::size_t n = net.node_count();
  auto sources = request.sources;
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  auto targets = request.targets;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  if (sources.empty() || targets.empty()) throw ValidationError("need sources and targets");
  for (const auto v : sources) {
    if (v >= n) throw ValidationError("source outside the graph");
  }
  for (const auto v : targets) {
    if (v >= n) throw ValidationError("target outside the graph");
  }
  if (request.tokens.size() != sources.size() * targets.size()) {
    throw ValidationError("expected one token per (source, target) pair");
  }
  const std::size_t start = net.rounds_executed();
  RouteRun run;
  run.nq = nq::nq_distributed(net, sources.size(), request.gamma);
  run.helpers = ruling::build_helper_sets(
      net, targets, {sources.size(), request.gamma, request.c}, run.nq.value);
  run.plan = plan_routing(net, sources, targets, run.helpers);
  run.report = route_tokens(net, run.plan, request.tokens);
  run.report.rounds_total = net.rounds_executed() - start;
  run.report.rounds_local = net.local_rounds_since(start);
  run.report.rounds_global = net.global_rounds_since(start);
  run.report.max_rx_bits = net.max_rx_bits_since(start);
  run.report.outside_hypothesis =
      !within_hypothesis(request.mode, targets.size(), run.nq.value, n);
  return run;
}

nlohmann::json to_json(const DeliveryReport& r) {
  return {{"delivered_count", r.delivered_count},
          {"rounds_local", r.rounds_local},
          {"rounds_global", r.rounds_global},
          {"rounds_total", r.rounds_total},
          {"max_rx_bits", r.max_rx_bits},
          {"max_rx_messages", r.max_rx_messages},
          {"xu_max", r.xu_max},
          {"yi_max", r.yi_max},
          {"batch", r.batch},
          {"audit_exempt", r.audit_exempt},
          {"outside_hypothesis", r.outside_hypothesis},
          {"seed", r.seed}};
}

}  // namespace hybrid::routing
