#include "helpers.hpp"

#include "physnet/dynamics.hpp"
#include "physnet/scenarios.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace physnet;

namespace {

// Floyd-Warshall on the undirected graph: independent shortest-path oracle.
std::vector<std::vector<double>> all_pairs(const Instance& inst) {
  const std::size_t n = inst.num_nodes();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0.0;
  for (std::size_t e = 0; e < inst.num_edges(); ++e) {
    const auto r = inst.column_rows(e);
    d[r[0]][r[1]] = std::min(d[r[0]][r[1]], inst.costs()[e]);
    d[r[1]][r[0]] = d[r[0]][r[1]];
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("ring scenario") {
  const Scenario s = ring_scenario(5);
  CHECK(s.instance.num_commodities() == 3);
  std::set<std::pair<int, int>> pairs;
  for (const auto& d : s.demands) pairs.insert({std::min(d.source, d.sink), std::max(d.source, d.sink)});
  CHECK(pairs.size() == 3);
  for (double c : s.instance.costs()) CHECK(c == 1.0);
  const auto a = s.initial.sample(3);
  const auto b = ring_scenario(5).initial.sample(3);
  CHECK(a == b);
  for (double v : a) {
    CHECK(v >= 0.001);
    CHECK(v <= 1.0);
  }
  CHECK(s.initial.sample(3, 6) != a);
}

TEST_CASE("bow-tie scenario") {
  const Scenario s8 = bowtie_scenario(8.0);
  CHECK(s8.instance.num_nodes() == 6);
  CHECK(s8.instance.num_edges() == 7);
  const auto d = all_pairs(s8.instance);
  CHECK(d[0][1] == doctest::Approx(10.0));  // L + 2 ties the direct edge
  CHECK(shortest_path_length(s8.instance, 0, 1) == doctest::Approx(10.0));

  const Scenario s = bowtie_scenario();
  CHECK(s.instance.num_edges() == 6);
  double total = 0.0;
  for (double c : s.instance.costs()) total += c;
  CHECK(total == 24.0);
  const auto di = all_pairs(s.instance);
  CHECK(di[0][1] == 10.0);
  CHECK(di[4][5] == 10.0);
  for (double v : s.initial.sample(6)) {
    CHECK(v >= 1.0);
    CHECK(v <= 10.0);
  }
  // Path lengths via the middle edge and via the other pair.
  const Scenario s30 = bowtie_scenario(30.0);
  const BowtieEdges be = bowtie_edges(s30.instance);
  REQUIRE(be.middle.has_value());
  CHECK(s30.instance.costs()[*be.middle] + 2.0 == 32.0);
  CHECK(s30.instance.costs()[be.bottom] + 4.0 == 14.0);
  CHECK_THROWS_AS((void)bowtie_scenario(0.0), ScenarioError);
  CHECK_THROWS_AS((void)bowtie_scenario(-3.0), ScenarioError);
}

TEST_CASE("unit square grid interior nodes have eight neighbours") {
  const std::vector<Point> square = {{-0.5, -0.5}, {4.5, -0.5}, {4.5, 4.5}, {-0.5, 4.5}};
  const RegionGrid g = build_region_grid(square, 1.0, 3);
  CHECK(g.nodes.size() == 25);
  std::vector<int> degree(g.nodes.size(), 0);
  for (const auto& e : g.edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  int interior = 0;
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    const auto p = g.nodes[v];
    if (p.x > 0.5 && p.x < 3.5 && p.y > 0.5 && p.y < 3.5) {
      CHECK(degree[v] == 8);
      ++interior;
    }
  }
  CHECK(interior == 9);
}

TEST_CASE("grid edge lengths stay in the perturbation band") {
  const RegionGrid g = build_region_grid(synthetic_region_polygon(), 1.0, 11);
  std::set<long> seen;
  for (const auto& e : g.edges) {
    const Point a = g.nodes[e.u], b = g.nodes[e.v];
    const bool diag = a.x != b.x && a.y != b.y;
    if (diag) {
      CHECK(e.length >= 1.26 - 1e-12);
      CHECK(e.length <= 1.56 + 1e-12);
    } else {
      CHECK(e.length >= 0.85 - 1e-12);
      CHECK(e.length <= 1.15 + 1e-12);
    }
    seen.insert(std::lround((e.length - (diag ? 1.41 : 1.0)) / 0.05));
  }
  CHECK(seen.size() == 7);
  for (const auto& p : g.nodes) CHECK(point_strictly_inside(g.polygon, p));
}

TEST_CASE("grid generation is deterministic") {
  const RegionGrid a = build_region_grid(synthetic_region_polygon(), 1.0, 5);
  const RegionGrid b = build_region_grid(synthetic_region_polygon(), 1.0, 5);
  const RegionGrid c = build_region_grid(synthetic_region_polygon(), 1.0, 6);
  REQUIRE(a.edges.size() == b.edges.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].length == b.edges[i].length);
    differs = differs || a.edges[i].length != c.edges[i].length;
  }
  CHECK(differs);
  CHECK_THROWS_AS((void)build_region_grid({{0.1, 0.1}, {0.2, 0.1}, {0.15, 0.2}}, 1.0, 1), ScenarioError);
}

TEST_CASE("segments leaving a concave region are dropped") {
  // L-shaped region; the diagonal across the notch corner must not appear.
  const std::vector<Point> ell = {{-0.5, -0.5}, {2.5, -0.5}, {2.5, 0.5}, {0.5, 0.5}, {0.5, 2.5}, {-0.5, 2.5}};
  const RegionGrid g = build_region_grid(ell, 1.0, 1);
  CHECK(g.nodes.size() == 5);
  for (const auto& e : g.edges) {
    const Point a = g.nodes[e.u], b = g.nodes[e.v];
    const bool crosses = (a.x == 1 && a.y == 0 && b.x == 0 && b.y == 1) || (a.x == 0 && a.y == 1 && b.x == 1 && b.y == 0);
    CHECK_FALSE(crosses);
  }
}

TEST_CASE("threshold demands") {
  RegionGrid g;
  g.nodes = {{0, 0}, {1, 0}, {10, 0}};
  TerminalSet t;
  t.nodes = {0, 1, 2};
  t.threshold = 2.0;
  auto d = demands_by_threshold(g, t);
  REQUIRE(d.size() == 1);
  CHECK(d[0].amount == 1.0);
  t.hub = 1;
  d = demands_by_threshold(g, t);
  REQUIRE(d.size() == 1);
  CHECK(d[0].amount == 7.0);
  t.threshold = 0.5;
  CHECK(demands_by_threshold(g, t).empty());
}

TEST_CASE("threshold demands on a 25-terminal layout") {
  const RegionGrid g = build_region_grid(synthetic_region_polygon(), 1.0, 3);
  const TerminalSet t = pick_terminals(g, 25, 0.5, 3);
  const auto d = demands_by_threshold(g, t);
  // Roughly half of the 300 pairs: the paper's layout produced 140.
  CHECK(d.size() > 60);
  CHECK(d.size() < 240);
}

TEST_CASE("pruning a star") {
  // Centre 0 with leaves 1 (terminal), 2, 3, and a terminal 4 on a path.
  const std::vector<GraphEdge> edges = {{0, 1, 1, ""}, {0, 2, 1, ""}, {0, 3, 1, ""}, {0, 4, 1, ""}};
  const std::vector<DemandSpec> demands = {{1, 4, 1.0}};
  const Instance inst = Instance::from_graph({"c", "t1", "l2", "l3", "t4"}, edges, demands);
  const PrunedNetwork p = prune_degree_one(inst, std::vector<double>(4, 1.0), {1, 4});
  CHECK(p.edge_kept == std::vector<bool>{true, false, false, true});
  CHECK(p.node_kept == std::vector<bool>{true, true, false, false, true});
  CHECK(p.nodes_removed == 2);
}

TEST_CASE("pruning reports disconnected demands") {
  const std::vector<GraphEdge> edges = {{0, 1, 1, ""}, {1, 2, 1, ""}};
  const std::vector<DemandSpec> demands = {{0, 2, 1.0}};
  const Instance inst = Instance::from_graph({"a", "b", "c"}, edges, demands);
  CHECK_THROWS_AS((void)prune_degree_one(inst, std::vector<double>{1.0, 1e-6}, {0, 2}), PruneError);
}

TEST_CASE("converged ring keeps every edge") {
  const Scenario s = ring_scenario(1);
  DynamicsSpec spec;
  spec.step_size = 0.05;
  const Trajectory t = run(s.instance, s.initial.sample(3), spec);
  const PrunedNetwork p = prune_degree_one(s.instance, t.final_x, s.terminals);
  CHECK(p.edges_removed == 0);
  CHECK(p.nodes_removed == 0);
}

TEST_CASE("separate routing baseline") {
  const BaselineReport bt = shortest_path_union_baseline(bowtie_scenario().instance);
  CHECK(bt.cost == doctest::Approx(20.0));
  CHECK(bt.energy == doctest::Approx(20.0));
  const BaselineReport one = shortest_path_union_baseline(testutil::single_edge(2.5));
  CHECK(one.total() == doctest::Approx(5.0));
  CHECK(shortest_path_union_baseline(testutil::ring()).cost == doctest::Approx(3.0));
}

TEST_CASE("bow-tie sharing beats separate routing") {
  const Scenario s = bowtie_scenario(std::numeric_limits<double>::infinity(), 2);
  DynamicsSpec spec;
  spec.step_size = 0.05;
  const Trajectory t = run(s.instance, s.initial.sample(6), spec);
  REQUIRE(t.status == RunStatus::Converged);
  const double ce = t.records.back().cost + t.records.back().energy;
  CHECK(ce < shortest_path_union_baseline(s.instance).total());
}

TEST_CASE("dijkstra agrees with floyd-warshall") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = testutil::random_instance(rng, 10, 18, 1);
    const auto d = all_pairs(inst);
    for (int s = 0; s < 10; ++s) {
      for (int t = 0; t < 10; ++t) CHECK(shortest_path_length(inst, s, t) == doctest::Approx(d[s][t]));
    }
  }
}

TEST_CASE("lattice scenario") {
  const std::vector<DemandSpec> demands = {{0, 99, 1.0}};
  const Scenario s = lattice_scenario(10, 10, demands);
  CHECK(s.instance.num_nodes() == 100);
  CHECK(s.instance.num_edges() == 180);
  CHECK(s.initial.sample(180)[7] == 0.5);
}
