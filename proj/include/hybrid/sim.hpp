#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybrid/errors.hpp"
#include "hybrid/graph.hpp"
#include "hybrid/rng.hpp"

namespace hybrid::sim {

using graph::NodeId;

enum class ViolationPolicy { audit_fail, adversarial_drop };

// Protocol capacities are expressed in units of the model's gamma, where one
// unit carries a constant number of O(log n)-bit messages:
//   bits per unit = kCapacityUnitFactor * ceil(log2 n)^2.
inline constexpr std::uint64_t kCapacityUnitFactor = 32;
std::uint64_t capacity_bits(std::uint64_t gamma, std::size_t n);

struct SimConfig {
  std::uint64_t gamma_bits = 64;             // global send and receive cap per node per round
  std::optional<std::uint64_t> lambda_bits;  // per edge and direction; unset = unbounded
  std::uint64_t seed = 0;
  ViolationPolicy policy = ViolationPolicy::audit_fail;
  double c = 2.0;
  std::size_t round_cap = 2'000'000;
  int kappa = graph::kDefaultKappa;
};

struct GlobalMessage {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<std::uint64_t> fields;
  std::uint32_t bits = 0;  // size on the wire
  std::uint64_t seq = 0;   // submission order within the round, set by the engine
};

// Local messages are unrestricted in size when lambda is unbounded; their size
// is accounted as 64 bits per word.
struct LocalMessage {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<std::uint64_t> words;
};

class CapacityViolation : public Error {
 public:
  CapacityViolation(NodeId node, std::size_t round, std::string direction, std::uint64_t bits,
                    std::uint64_t cap);
  NodeId node() const { return node_; }
  std::size_t round() const { return round_; }
  const std::string& direction() const { return direction_; }
  std::uint64_t bits() const { return bits_; }

 private:
  NodeId node_;
  std::size_t round_;
  std::string direction_;
  std::uint64_t bits_;
};

enum class RoundKind { idle, local, global, both };
const char* to_string(RoundKind kind);

struct NodeBits {
  NodeId node;
  std::uint64_t sent;
  std::uint64_t received;
};

struct DroppedMessage {
  NodeId src;
  NodeId dst;
  std::uint32_t bits;
};

struct RoundRecord {
  std::size_t index = 0;
  RoundKind kind = RoundKind::idle;
  std::string phase;
  std::vector<NodeBits> global_bits;  // nodes with non-zero global traffic, by node
  std::size_t local_messages = 0;
  std::uint64_t local_bits = 0;
  std::size_t global_delivered = 0;
  std::vector<DroppedMessage> dropped;
};

class ExecutionTrace {
 public:
  std::vector<RoundRecord> rounds;

  // Rounds that used the local network (local-only or both).
  std::size_t local_round_count() const;
  // Rounds that used the global network (global-only or both).
  std::size_t global_round_count() const;
  // Every executed round once, including idle ones.
  std::size_t total_round_count() const { return rounds.size(); }

  std::uint64_t max_send_bits() const;
  std::uint64_t max_receive_bits() const;
  // Total delivered global bits received by nodes in the set (flags indexed by node).
  std::uint64_t bits_received_by(const std::vector<bool>& members) const;
  std::size_t dropped_count() const;

  void append(const ExecutionTrace& other);
  nlohmann::json to_json() const;
};

struct Inboxes {
  std::vector<std::vector<LocalMessage>> local;
  std::vector<std::vector<GlobalMessage>> global;
};

// Bulk-synchronous engine. A protocol stages every node's outgoing messages
// for the round and then calls step(); each node's logic may only read its
// own state and the inbox it got from the previous step().
class Network {
 public:
  Network(const graph::WeightedGraph& g, SimConfig config, ExecutionTrace* trace = nullptr);

  const graph::WeightedGraph& graph() const { return *g_; }
  const SimConfig& config() const { return config_; }
  std::size_t node_count() const { return g_->node_count(); }
  std::uint32_t field_bits() const { return field_bits_; }
  std::size_t rounds_executed() const { return rounds_; }

  // Statistics over rounds [from, rounds_executed()).
  std::size_t local_rounds_since(std::size_t from) const;
  std::size_t global_rounds_since(std::size_t from) const;
  std::uint64_t max_rx_bits_since(std::size_t from) const;

  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const { return phase_; }

  void send_local(NodeId src, NodeId dst, std::vector<std::uint64_t> words);
  void send_global(NodeId src, NodeId dst, std::vector<std::uint64_t> fields, std::uint32_t bits);

  // Executes one round: checks capacities, applies the violation policy and
  // returns what every node receives. Deliveries are sorted by (src, seq).
  Inboxes step();

  // Randomness private to one node (seeded from the config seed).
  Rng node_rng(NodeId v, std::string_view purpose) const;

 private:
  const graph::WeightedGraph* g_;
  SimConfig config_;
  ExecutionTrace* trace_;
  std::uint32_t field_bits_;
  std::size_t rounds_ = 0;
  std::vector<RoundKind> kinds_;
  std::vector<std::uint64_t> max_rx_;
  std::string phase_;
  std::vector<LocalMessage> local_out_;
  std::vector<GlobalMessage> global_out_;
};

// Filters a round's global messages against gamma. Under audit_fail the first
// violation throws (receive side checked first, smallest node first). Under
// adversarial_drop each source keeps the longest prefix of its messages in
// (dst, seq) order that fits, then each destination keeps the longest prefix
// in (src, seq) order that fits; everything else is dropped.
struct Delivery {
  std::vector<GlobalMessage> delivered;
  std::vector<GlobalMessage> dropped;
};
Delivery deliver_global(std::vector<GlobalMessage> pending, std::size_t n,
                        const SimConfig& config, std::size_t round);

// Per-node view handed to a NodeProgram each round.
class NodeContext {
 public:
  NodeId self() const { return self_; }
  std::size_t round() const { return round_; }
  std::size_t node_count() const { return n_; }
  std::span<const graph::Arc> neighbors() const { return neighbors_; }
  const std::vector<LocalMessage>& local_inbox() const { return *local_in_; }
  const std::vector<GlobalMessage>& global_inbox() const { return *global_in_; }

  void send_local(NodeId to, std::vector<std::uint64_t> words);
  void send_global(NodeId to, std::vector<std::uint64_t> fields, std::uint32_t bits);
  void halt() { halted_ = true; }
  Rng& rng() { return *rng_; }

 private:
  friend struct RunDriver;
  NodeId self_ = 0;
  std::size_t round_ = 0;
  std::size_t n_ = 0;
  std::span<const graph::Arc> neighbors_;
  const std::vector<LocalMessage>* local_in_ = nullptr;
  const std::vector<GlobalMessage>* global_in_ = nullptr;
  Network* net_ = nullptr;
  Rng* rng_ = nullptr;
  bool halted_ = false;
};

// A node's state machine; it keeps its own state between rounds.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual void step(NodeContext& ctx) = 0;
};

struct RunResult {
  ExecutionTrace trace;
  std::vector<bool> halted;
};

// Runs one program per node until all halt (or the round cap is hit).
// Messages sent in round r arrive in round r + 1; messages to halted nodes
// are discarded.
RunResult run(const graph::WeightedGraph& g, std::vector<std::unique_ptr<NodeProgram>>& programs,
              const SimConfig& config);

}  // namespace hybrid::sim
