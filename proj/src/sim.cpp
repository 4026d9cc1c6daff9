#include "hybrid/sim.hpp"

#include <algorithm>
#include <stdexcept>

#include "hybrid/bits.hpp"

namespace hybrid::sim {

std::uint64_t capacity_bits(std::uint64_t gamma, std::size_t n) {
  const std::uint64_t l = log_n(n);
  return gamma * kCapacityUnitFactor * l * l;
}

CapacityViolation::CapacityViolation(NodeId node, std::size_t round, std::string direction,
                                     std::uint64_t bits, std::uint64_t cap)
    : Error("capacity violation: node " + std::to_string(graph::external_id(node)) + " " +
            direction + " " + std::to_string(bits) + " bits in round " + std::to_string(round) +
            " (cap " + std::to_string(cap) + ")"),
      node_(node),
      round_(round),
      direction_(std::move(direction)),
      bits_(bits) {}

const char* to_string(RoundKind kind) {
  switch (kind) {
    case RoundKind::idle: return "idle";
    case RoundKind::local: return "local";
    case RoundKind::global: return "global";
    case RoundKind::both: return "both";
  }
  return "idle";
}

std::size_t ExecutionTrace::local_round_count() const {
  return static_cast<std::size_t>(std::count_if(rounds.begin(), rounds.end(), [](const auto& r) {
    return r.kind == RoundKind::local || r.kind == RoundKind::both;
  }));
}

std::size_t ExecutionTrace::global_round_count() const {
  return static_cast<std::size_t>(std::count_if(rounds.begin(), rounds.end(), [](const auto& r) {
    return r.kind == RoundKind::global || r.kind == RoundKind::both;
  }));
}

std::uint64_t ExecutionTrace::max_send_bits() const {
  std::uint64_t m = 0;
  for (const auto& r : rounds) {
    for (const auto& b : r.global_bits) m = std::max(m, b.sent);
  }
  return m;
}

std::uint64_t ExecutionTrace::max_receive_bits() const {
  std::uint64_t m = 0;
  for (const auto& r : rounds) {
    for (const auto& b : r.global_bits) m = std::max(m, b.received);
  }
  return m;
}

std::uint64_t ExecutionTrace::bits_received_by(const std::vector<bool>& members) const {
  std::uint64_t total = 0;
  for (const auto& r : rounds) {
    for (const auto& b : r.global_bits) {
      if (b.node < members.size() && members[b.node]) total += b.received;
    }
  }
  return total;
}

std::size_t ExecutionTrace::dropped_count() const {
  std::size_t total = 0;
  for (const auto& r : rounds) total += r.dropped.size();
  return total;
}

void ExecutionTrace::append(const ExecutionTrace& other) {
  const std::size_t offset = rounds.size();
  for (RoundRecord r : other.rounds) {
    r.index += offset;
    rounds.push_back(std::move(r));
  }
}

nlohmann::json ExecutionTrace::to_json() const {
  using nlohmann::json;
  json rounds_json = json::array();
  json per_node = json::array();
  json dropped_json = json::array();
  for (const auto& r : rounds) {
    rounds_json.push_back({{"index", r.index},
                           {"kind", to_string(r.kind)},
                           {"phase", r.phase},
                           {"local_messages", r.local_messages},
                           {"local_bits", r.local_bits},
                           {"global_delivered", r.global_delivered},
                           {"global_dropped", r.dropped.size()}});
    json row = json::array();
    for (const auto& b : r.global_bits) {
      row.push_back(json::array({graph::external_id(b.node), b.sent, b.received}));
    }
    per_node.push_back(std::move(row));
    for (const auto& d : r.dropped) {
      dropped_json.push_back(json::array(
          {r.index, graph::external_id(d.src), graph::external_id(d.dst), d.bits}));
    }
  }
  return {{"rounds", std::move(rounds_json)},
          {"per_node_bits", std::move(per_node)},
          {"dropped", std::move(dropped_json)},
          {"totals",
           {{"local", local_round_count()},
            {"global", global_round_count()},
            {"combined", total_round_count()}}}};
}

Delivery deliver_global(std::vector<GlobalMessage> pending, std::size_t n,
                        const SimConfig& config, std::size_t round) {
  Delivery out;
  const std::uint64_t cap = config.gamma_bits;
  if (config.policy == ViolationPolicy::audit_fail) {
    std::vector<std::uint64_t> sent(n, 0), received(n, 0);
    for (const auto& m : pending) {
      sent.at(m.src) += m.bits;
      received.at(m.dst) += m.bits;
    }
    for (NodeId v = 0; v < n; ++v) {
      if (received[v] > cap) throw CapacityViolation(v, round, "received", received[v], cap);
    }
    for (NodeId v = 0; v < n; ++v) {
      if (sent[v] > cap) throw CapacityViolation(v, round, "sent", sent[v], cap);
    }
    out.delivered = std::move(pending);
    return out;
  }

  std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) {
    return std::tie(a.src, a.dst, a.seq) < std::tie(b.src, b.dst, b.seq);
  });
  std::vector<GlobalMessage> kept;
  std::vector<std::uint64_t> used(n, 0);
  std::vector<bool> closed(n, false);
  for (auto& m : pending) {
    if (!closed[m.src] && used[m.src] + m.bits <= cap) {
      used[m.src] += m.bits;
      kept.push_back(std::move(m));
    } else {
      closed[m.src] = true;
      out.dropped.push_back(std::move(m));
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return std::tie(a.dst, a.src, a.seq) < std::tie(b.dst, b.src, b.seq);
  });
  std::fill(used.begin(), used.end(), 0);
  std::fill(closed.begin(), closed.end(), false);
  for (auto& m : kept) {
    if (!closed[m.dst] && used[m.dst] + m.bits <= cap) {
      used[m.dst] += m.bits;
      out.delivered.push_back(std::move(m));
    } else {
      closed[m.dst] = true;
      out.dropped.push_back(std::move(m));
    }
  }
  std::sort(out.dropped.begin(), out.dropped.end(), [](const auto& a, const auto& b) {
    return std::tie(a.src, a.seq) < std::tie(b.src, b.seq);
  });
  return out;
}

Network::Network(const graph::WeightedGraph& g, SimConfig config, ExecutionTrace* trace)
    : g_(&g),
      config_(config),
      trace_(trace),
      field_bits_(hybrid::field_bits(g.node_count(), config.kappa)) {
  if (config_.gamma_bits < 1) throw ValidationError("gamma must be at least 1 bit");
}

void Network::send_local(NodeId src, NodeId dst, std::vector<std::uint64_t> words) {
  if (!g_->adjacent(src, dst)) {
    throw std::logic_error("local message between non-adjacent nodes " +
                           std::to_string(graph::external_id(src)) + " and " +
                           std::to_string(graph::external_id(dst)));
  }
  local_out_.push_back({src, dst, std::move(words)});
}

void Network::send_global(NodeId src, NodeId dst, std::vector<std::uint64_t> fields,
                          std::uint32_t bits) {
  if (src >= node_count() || dst >= node_count()) {
    throw std::logic_error("global message endpoint out of range");
  }
  GlobalMessage m;
  m.src = src;
  m.dst = dst;
  m.fields = std::move(fields);
  m.bits = bits;
  m.seq = global_out_.size();
  global_out_.push_back(std::move(m));
}

Rng Network::node_rng(NodeId v, std::string_view purpose) const {
  return Rng(derive_seed(config_.seed, purpose, v));
}

std::size_t Network::local_rounds_since(std::size_t from) const {
  std::size_t count = 0;
  for (std::size_t r = from; r < kinds_.size(); ++r) {
    if (kinds_[r] == RoundKind::local || kinds_[r] == RoundKind::both) ++count;
  }
  return count;
}

std::size_t Network::global_rounds_since(std::size_t from) const {
  std::size_t count = 0;
  for (std::size_t r = from; r < kinds_.size(); ++r) {
    if (kinds_[r] == RoundKind::global || kinds_[r] == RoundKind::both) ++count;
  }
  return count;
}

std::uint64_t Network::max_rx_bits_since(std::size_t from) const {
  std::uint64_t m = 0;
  for (std::size_t r = from; r < max_rx_.size(); ++r) m = std::max(m, max_rx_[r]);
  return m;
}

Inboxes Network::step() {
  if (rounds_ >= config_.round_cap) {
    throw RoundCapExceeded("round cap of " + std::to_string(config_.round_cap) + " exceeded");
  }
  const std::size_t n = node_count();
  const std::size_t round_index = rounds_++;
  Inboxes in;
  in.local.resize(n);
  in.global.resize(n);

  RoundRecord rec;
  rec.index = round_index;
  rec.phase = phase_;
  const bool used_local = !local_out_.empty();
  const bool used_global = !global_out_.empty();
  rec.kind = used_local && used_global ? RoundKind::both
             : used_local              ? RoundKind::local
             : used_global             ? RoundKind::global
                                       : RoundKind::idle;

  if (used_local) {
    if (config_.lambda_bits) {
      std::sort(local_out_.begin(), local_out_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
      });
      std::uint64_t run = 0;
      for (std::size_t i = 0; i < local_out_.size(); ++i) {
        if (i > 0 && (local_out_[i].src != local_out_[i - 1].src ||
                      local_out_[i].dst != local_out_[i - 1].dst)) {
          run = 0;
        }
        run += 64 * local_out_[i].words.size();
        if (run > *config_.lambda_bits) {
          throw CapacityViolation(local_out_[i].src, round_index, "sent on edge", run,
                                  *config_.lambda_bits);
        }
      }
    }
    std::stable_sort(local_out_.begin(), local_out_.end(),
                     [](const auto& a, const auto& b) { return a.src < b.src; });
    rec.local_messages = local_out_.size();
    for (auto& m : local_out_) {
      rec.local_bits += 64 * m.words.size();
      in.local[m.dst].push_back(std::move(m));
    }
    local_out_.clear();
  }

  if (used_global) {
    std::vector<std::uint64_t> sent(n, 0), received(n, 0);
    for (const auto& m : global_out_) sent[m.src] += m.bits;
    Delivery d = deliver_global(std::move(global_out_), n, config_, round_index);
    global_out_.clear();
    std::sort(d.delivered.begin(), d.delivered.end(), [](const auto& a, const auto& b) {
      return std::tie(a.src, a.seq) < std::tie(b.src, b.seq);
    });
    rec.global_delivered = d.delivered.size();
    for (auto& m : d.delivered) {
      received[m.dst] += m.bits;
      in.global[m.dst].push_back(std::move(m));
    }
    for (const auto& m : d.dropped) rec.dropped.push_back({m.src, m.dst, m.bits});
    for (NodeId v = 0; v < n; ++v) {
      if (sent[v] != 0 || received[v] != 0) rec.global_bits.push_back({v, sent[v], received[v]});
    }
  }
  kinds_.push_back(rec.kind);
  std::uint64_t rx = 0;
  for (const auto& b : rec.global_bits) rx = std::max(rx, b.received);
  max_rx_.push_back(rx);
  if (trace_ != nullptr) trace_->rounds.push_back(std::move(rec));
  return in;
}

void NodeContext::send_local(NodeId to, std::vector<std::uint64_t> words) {
  net_->send_local(self_, to, std::move(words));
}

void NodeContext::send_global(NodeId to, std::vector<std::uint64_t> fields, std::uint32_t bits) {
  net_->send_global(self_, to, std::move(fields), bits);
}

struct RunDriver {
  static RunResult run(const graph::WeightedGraph& g,
                       std::vector<std::unique_ptr<NodeProgram>>& programs,
                       const SimConfig& config) {
    const std::size_t n = g.node_count();
    if (programs.size() != n) throw ValidationError("need exactly one program per node");
    RunResult result;
    result.halted.assign(n, false);
    Network net(g, config, &result.trace);
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (NodeId v = 0; v < n; ++v) rngs.push_back(net.node_rng(v, "program"));
    Inboxes in;
    in.local.resize(n);
    in.global.resize(n);
    std::size_t round = 0;
    while (std::find(result.halted.begin(), result.halted.end(), false) != result.halted.end()) {
      for (NodeId v = 0; v < n; ++v) {
        if (result.halted[v]) continue;
        NodeContext ctx;
        ctx.self_ = v;
        ctx.round_ = round;
        ctx.n_ = n;
        ctx.neighbors_ = g.neighbors(v);
        ctx.local_in_ = &in.local[v];
        ctx.global_in_ = &in.global[v];
        ctx.net_ = &net;
        ctx.rng_ = &rngs[v];
        programs[v]->step(ctx);
        if (ctx.halted_) result.halted[v] = true;
      }
      in = net.step();
      for (NodeId v = 0; v < n; ++v) {
        if (result.halted[v]) {
          in.local[v].clear();
          in.global[v].clear();
        }
      }
      ++round;
    }
    return result;
  }
};

RunResult run(const graph::WeightedGraph& g, std::vector<std::unique_ptr<NodeProgram>>& programs,
              const SimConfig& config) {
  return RunDriver::run(g, programs, config);
}

}  // namespace hybrid::sim
