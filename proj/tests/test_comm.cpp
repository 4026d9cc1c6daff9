#include <doctest.h>

#include <algorithm>

#include "hybrid/bits.hpp"
#include "hybrid/comm.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/graph.hpp"

using namespace hybrid;
using graph::GraphKind;

namespace {

graph::WeightedGraph path(std::size_t n) {
  graph::GenParams p;
  p.n = n;
  return graph::generate(GraphKind::path, p, 1);
}

sim::SimConfig config(std::uint64_t gamma_bits, std::uint64_t seed = 1) {
  sim::SimConfig c;
  c.gamma_bits = gamma_bits;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("aggregate max and sum") {
  const auto g3 = path(3);
  const auto mx = comm::aggregate(g3, {3, 1, 4}, comm::AggregateOp::max, config(64));
  CHECK(mx.value == 4);

  const auto g8 = path(8);
  const auto sum = comm::aggregate(g8, std::vector<std::uint64_t>(8, 1), comm::AggregateOp::sum,
                                   config(64));
  CHECK(sum.value == 8);
  CHECK(sum.rounds <= 6);
  CHECK(sum.trace.max_receive_bits() <= 64);

  const auto g1 = graph::WeightedGraph(1, {}, 1);
  const auto single = comm::aggregate(g1, {42}, comm::AggregateOp::max, config(64));
  CHECK(single.value == 42);
  CHECK(single.rounds == 0);
}

TEST_CASE("property: aggregate equals the sequential fold for every n") {
  for (std::size_t n = 1; n <= 40; ++n) {
    const auto g = path(n);
    std::vector<std::uint64_t> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = (i * 7919 + 13) % n;  // sums stay below n^2
    const auto s = comm::aggregate(g, values, comm::AggregateOp::sum, config(64));
    const auto m = comm::aggregate(g, values, comm::AggregateOp::max, config(64));
    std::uint64_t expect_sum = 0;
    for (const auto v : values) expect_sum += v;
    CHECK(s.value == expect_sum);
    CHECK(m.value == *std::max_element(values.begin(), values.end()));
    const bool power = (n & (n - 1)) == 0;  // no fold-in / fold-out rounds
    CHECK(s.rounds == floor_log2(n) + (power ? 0 : 2));
  }
}

TEST_CASE("multi-field aggregate with a custom combiner reaches every node") {
  const auto g = path(13);
  sim::Network net(g, config(256));
  std::vector<comm::Fields> values;
  for (std::uint64_t i = 0; i < 13; ++i) values.push_back({i, 13 - i});
  const auto out = comm::aggregate_fields(net, values, [](const comm::Fields& a, const comm::Fields& b) {
    return comm::Fields{std::max(a[0], b[0]), std::min(a[1], b[1])};
  });
  CHECK(out == comm::Fields{12, 1});
}

TEST_CASE("aggregate rejects values wider than a field or messages above gamma") {
  const auto g = path(4);
  sim::Network net(g, config(64));
  CHECK_THROWS_AS(comm::aggregate(net, {1ull << 40, 0, 0, 0}, comm::AggregateOp::max),
                  ValidationError);
  sim::Network tiny(g, config(3));
  CHECK_THROWS_AS(comm::aggregate(tiny, {1, 0, 0, 0}, comm::AggregateOp::max), ValidationError);
}

TEST_CASE("broadcast of one item over 100 seeds") {
  const auto g = path(16);
  const std::size_t budget = 2 * 4 * 4;  // c log^2 n with c = 2
  std::size_t worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    sim::ExecutionTrace trace;
    sim::Network net(g, config(64, seed), &trace);
    std::vector<std::vector<comm::Item>> holders(16);
    holders[seed % 16].push_back({5, 99});
    const auto res = comm::broadcast_set(net, holders, 1, 16);
    for (const auto& k : res.known) CHECK(k == std::vector<comm::Item>{{5, 99}});
    worst = std::max(worst, res.rounds);
    CHECK(trace.max_receive_bits() <= 64);
  }
  CHECK(worst <= budget);
}

TEST_CASE("broadcast corner cases") {
  const auto g = path(16);
  sim::Network net(g, config(64));
  const auto none = comm::broadcast_set(net, std::vector<std::vector<comm::Item>>(16), 0, 16);
  CHECK(none.rounds == 0);

  std::vector<std::vector<comm::Item>> all(16, std::vector<comm::Item>{{1, 1}});
  const auto done = comm::broadcast_set(net, all, 1, 16);
  CHECK(done.rounds <= 2 * ceil_log2(16));
}

TEST_CASE("property: broadcast of many items delivers the full set") {
  const auto g = graph::generate(GraphKind::grid, {.rows = 6, .cols = 6}, 1);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sim::ExecutionTrace trace;
    sim::Network net(g, config(128, seed), &trace);
    std::vector<std::vector<comm::Item>> holders(36);
    std::vector<comm::Item> expect;
    for (std::uint64_t i = 0; i < 20; ++i) {
      holders[(i * 5 + seed) % 36].push_back({i * 3, i});
      expect.push_back({i * 3, i});
    }
    const auto res = comm::broadcast_set(net, holders, 20, 40);
    for (const auto& k : res.known) CHECK(k == expect);
    CHECK(trace.max_receive_bits() <= 128);
    CHECK(trace.max_send_bits() <= 128);
  }
}
