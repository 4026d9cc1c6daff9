#include <doctest.h>

#include <set>

#include "hybrid/errors.hpp"
#include "hybrid/graph.hpp"
#include "support.hpp"

using namespace hybrid;
using graph::GraphKind;

namespace {

graph::WeightedGraph make(GraphKind kind, std::size_t n, std::uint64_t seed = 1) {
  graph::GenParams p;
  p.n = n;
  return graph::generate(kind, p, seed);
}

}  // namespace

TEST_CASE("edge-list parsing") {
  const auto g = graph::parse_edge_list("3 2 5\n1 2 1\n2 3 5\n");
  CHECK(g.node_count() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.max_weight() == 5);
  REQUIRE(g.edge_between(1, 2));
  CHECK(g.edges()[*g.edge_between(1, 2)].w == 5);
  CHECK_FALSE(g.adjacent(0, 2));

  CHECK_THROWS_AS(graph::parse_edge_list("2 1 1\n1 1 1\n"), ValidationError);
  CHECK_THROWS_AS(graph::parse_edge_list("4 2 1\n1 2 1\n3 4 1\n"), ValidationError);
  CHECK_THROWS_AS(graph::parse_edge_list("2 1 1\n1 2 3\n"), ValidationError);  // weight above W
  CHECK_THROWS_AS(graph::parse_edge_list("3 2 1\n1 2 1\n1 2 1\n"), ValidationError);
  CHECK_THROWS_AS(graph::parse_edge_list("3 3 1\n1 2 1\n2 3 1\n"), ParseError);  // short
}

TEST_CASE("parse errors carry the line number") {
  try {
    graph::parse_edge_list("# header comment\n3 2 1\n1 2 1\n2 x 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("edge-list round trip and relabelling") {
  const auto g = graph::generate(GraphKind::erdos_renyi, {.n = 30, .edge_probability = 0.2,
                                                          .max_edge_weight = 9},
                                 4);
  const auto h = graph::parse_edge_list(graph::format_edge_list(g));
  REQUIRE(h.edge_count() == g.edge_count());
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    CHECK(h.edges()[i].u == g.edges()[i].u);
    CHECK(h.edges()[i].v == g.edges()[i].v);
    CHECK(h.edges()[i].w == g.edges()[i].w);
  }
  const auto r = graph::parse_edge_list("3 2 1\n10 20 1\n20 30 1\n");
  CHECK(r.labels() == std::vector<std::int64_t>{10, 20, 30});
  CHECK(r.adjacent(0, 1));
  CHECK(r.adjacent(1, 2));
}

TEST_CASE("generators") {
  const auto p9 = make(GraphKind::path, 9);
  CHECK(p9.edge_count() == 8);
  const auto k10 = make(GraphKind::complete, 10);
  CHECK(k10.edge_count() == 45);
  const auto grid = graph::generate(GraphKind::grid, {.rows = 5, .cols = 5}, 1);
  CHECK(grid.node_count() == 25);
  CHECK(grid.edge_count() == 40);
  CHECK(graph::hop_diameter(grid) == 8);

  const auto lol = graph::generate(GraphKind::lollipop, {.n = 100, .clique = 50}, 1);
  CHECK(lol.edge_count() == 50 * 49 / 2 + 50);
  // The tail endpoint sees one more node per hop until it reaches the clique.
  const auto hops = testsupport::floyd_hops(lol);
  for (std::int64_t d = 0; d < 50; ++d) CHECK(testsupport::ball(hops, 99, d) == static_cast<std::size_t>(d + 1));

  const auto t1 = make(GraphKind::random_tree, 50, 3);
  const auto t2 = make(GraphKind::random_tree, 50, 3);
  CHECK(t1.edge_count() == 49);
  CHECK(graph::format_edge_list(t1) == graph::format_edge_list(t2));
  CHECK(graph::parse_graph_kind("er") == GraphKind::erdos_renyi);
  CHECK_FALSE(graph::parse_graph_kind("nope"));
}

TEST_CASE("neighborhood profiles") {
  const auto p9 = make(GraphKind::path, 9);
  CHECK(graph::neighborhood_profile(p9, 0).sizes ==
        std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto k10 = make(GraphKind::complete, 10);
  CHECK(graph::neighborhood_profile(k10, 3).sizes == std::vector<std::size_t>{1, 10});
  const auto star = make(GraphKind::star, 10);
  CHECK(graph::neighborhood_profile(star, 4).sizes == std::vector<std::size_t>{1, 2, 10});
  CHECK(graph::neighborhood_profile(star, 4).at(7) == 10);

  const auto n9 = graph::min_neighborhood_profile(p9);
  for (std::size_t d = 0; d < n9.size(); ++d) CHECK(n9[d] == std::min<std::size_t>(d + 1, 9));
  CHECK(graph::min_neighborhood_profile(k10)[1] == 10);
  CHECK(graph::min_neighborhood_profile(star)[1] == 2);
  CHECK(graph::min_neighborhood_profile(star)[2] == 10);
  CHECK(graph::hop_diameter(p9) == 8);
  CHECK(graph::hop_diameter(k10) == 1);
}

TEST_CASE("property: profiles match the Floyd-Warshall oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = graph::generate(GraphKind::erdos_renyi, {.n = 40, .edge_probability = 0.08}, seed);
    const auto hops = testsupport::floyd_hops(g);
    for (graph::NodeId v = 0; v < g.node_count(); ++v) {
      const auto prof = graph::neighborhood_profile(g, v);
      for (std::size_t d = 0; d < prof.sizes.size() + 2; ++d) {
        CHECK(prof.at(d) == testsupport::ball(hops, v, static_cast<std::int64_t>(d)));
      }
    }
  }
}

TEST_CASE("exact distances") {
  const auto p3 = make(GraphKind::path, 3);
  CHECK(graph::exact_distances(p3, 0).dist == std::vector<graph::Weight>{0, 1, 2});
  CHECK(graph::exact_distances(p3, 0, 1).dist ==
        std::vector<graph::Weight>{0, 1, graph::kInfinity});
  const auto tri = graph::parse_edge_list("3 3 5\n1 2 1\n2 3 1\n1 3 5\n");
  CHECK(graph::exact_distances(tri, 0).dist[2] == 2);
  CHECK(graph::exact_distances(tri, 0, 1).dist[2] == 5);
}

TEST_CASE("property: Dijkstra matches Floyd-Warshall on weighted random graphs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = graph::generate(
        GraphKind::erdos_renyi, {.n = 35, .edge_probability = 0.12, .max_edge_weight = 20}, seed);
    const auto fw = testsupport::floyd_weights(g);
    for (graph::NodeId s = 0; s < g.node_count(); s += 5) {
      const auto d = graph::exact_distances(g, s);
      for (graph::NodeId t = 0; t < g.node_count(); ++t) CHECK(d.dist[t] == fw[s][t]);
    }
  }
}
