#include <doctest.h>

#include <map>

#include "hybrid/bits.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/graph.hpp"
#include "hybrid/routing.hpp"

using namespace hybrid;
using graph::GraphKind;
using graph::NodeId;

namespace {

graph::WeightedGraph make(GraphKind kind, std::size_t n) {
  graph::GenParams p;
  p.n = n;
  return graph::generate(kind, p, 1);
}

sim::SimConfig config(std::uint64_t gamma_bits, std::uint64_t seed = 1) {
  sim::SimConfig c;
  c.gamma_bits = gamma_bits;
  c.seed = seed;
  return c;
}

routing::RouteRequest request(const std::vector<NodeId>& sources, const std::vector<NodeId>& targets,
                              std::size_t n, routing::TargetMode mode = routing::TargetMode::fixed) {
  routing::RouteRequest r;
  r.sources = sources;
  r.targets = targets;
  r.mode = mode;
  const auto f = field_bits(n);
  for (const auto s : sources) {
    for (const auto t : targets) r.tokens.push_back({s, t, (s * 131 + t * 7 + 1) % (1ull << f)});
  }
  return r;
}

// What every target should end up with, computed directly from the request.
std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> expected(
    const routing::RouteRequest& r) {
  std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> out;
  for (const auto& t : r.tokens) out[t.target].push_back({t.source, t.payload});
  for (auto& [t, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace

TEST_CASE("batch size") {
  CHECK(routing::batch_size(1568, 128) == 4);
  CHECK(routing::batch_size(1, 500) == 1);
  CHECK(routing::batch_size(8 * 49, 128) == 1);
  CHECK(routing::load_constant(2.0) == 7.0);
}

TEST_CASE("task blocks split k evenly") {
  routing::RoutingPlan plan;
  plan.k = 10;
  plan.helpers_of = {{1, 2, 3}};
  std::vector<std::size_t> loads;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < 3; ++pos) {
    const auto [lo, hi] = plan.task_block(0, pos);
    CHECK(lo == next);
    next = hi;
    loads.push_back(hi - lo);
  }
  CHECK(next == 10);
  CHECK(loads == std::vector<std::size_t>{4, 3, 3});
  plan.k = 3;
  for (std::size_t pos = 0; pos < 3; ++pos) {
    const auto [lo, hi] = plan.task_block(0, pos);
    CHECK(hi - lo == 1);
  }
}

TEST_CASE("hypothesis check") {
  CHECK(routing::within_hypothesis(routing::TargetMode::iid, 3, Rational(3), 64));
  CHECK_FALSE(routing::within_hypothesis(routing::TargetMode::iid, 4, Rational(7, 2), 64));
  CHECK(routing::within_hypothesis(routing::TargetMode::fixed, 36, Rational(1), 64));
  CHECK_FALSE(routing::within_hypothesis(routing::TargetMode::fixed, 37, Rational(1), 64));
}

TEST_CASE("four far sources reach a near target with exact payloads") {
  const auto g = make(GraphKind::path, 10);
  const auto req = request({6, 7, 8, 9}, {0}, 10);
  sim::ExecutionTrace trace;
  sim::Network net(g, config(256), &trace);
  const auto run = routing::run_routing(net, req);
  CHECK(run.report.delivered == expected(req));
  CHECK(run.report.delivered_count == 4);
  CHECK(trace.max_receive_bits() <= 256);
}

TEST_CASE("a single token still goes through the global network") {
  const auto g = make(GraphKind::path, 10);
  const auto req = request({4}, {3}, 10);
  sim::Network net(g, config(sim::capacity_bits(1, 10)));
  const auto run = routing::run_routing(net, req);
  CHECK(run.report.delivered == expected(req));
  CHECK(run.report.rounds_global >= 1);
}

TEST_CASE("plans are reproducible for a fixed seed") {
  const auto g = graph::generate(GraphKind::grid, {.rows = 6, .cols = 6}, 1);
  auto plan_once = [&] {
    sim::Network net(g, config(sim::capacity_bits(1, 36), 5));
    return routing::run_routing(net, request({1, 5, 9, 30}, {0, 35}, 36)).plan;
  };
  const auto a = plan_once();
  const auto b = plan_once();
  CHECK(a.h_seed.coefficients == b.h_seed.coefficients);
  CHECK(a.g_seed.coefficients == b.g_seed.coefficients);
  CHECK(a.helpers_of == b.helpers_of);
  CHECK(a.batch == b.batch);
}

TEST_CASE("lollipop routing over several seeds") {
  const auto g = graph::generate(GraphKind::lollipop, {.n = 200, .clique = 100}, 1);
  std::vector<NodeId> sources;
  for (NodeId v = 0; v < 100; ++v) sources.push_back(v);
  const auto gamma_bits = sim::capacity_bits(16, 200);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto targets = ruling::sample_iid_targets(200, 1, seed);
    auto req = request(sources, targets, 200, routing::TargetMode::iid);
    req.gamma = 16;
    sim::ExecutionTrace trace;
    sim::Network net(g, config(gamma_bits, seed), &trace);
    const auto run = routing::run_routing(net, req);
    CHECK(run.report.delivered == expected(req));
    CHECK(trace.max_receive_bits() <= gamma_bits);
    CHECK(trace.max_send_bits() <= gamma_bits);
    CHECK_FALSE(run.report.audit_exempt);
  }
}

TEST_CASE("routing rejects malformed requests") {
  const auto g = make(GraphKind::path, 10);
  sim::Network net(g, config(256));
  auto req = request({1, 2}, {0}, 10);
  req.tokens.pop_back();
  CHECK_THROWS_AS(routing::run_routing(net, req), ValidationError);
  CHECK_THROWS_AS(routing::run_routing(net, request({}, {0}, 10)), ValidationError);
}
