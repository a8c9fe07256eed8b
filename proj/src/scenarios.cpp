#include "physnet/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <utility>

namespace physnet {

// ---------------------------------------------------------------------------
// Initial capacities

void InitialCapacity::validate(std::size_t m) const {
  switch (kind) {
    case Kind::Uniform:
      if (!(value > 0.0) || !std::isfinite(value)) throw ScenarioError("initial capacity must be positive");
      return;
    case Kind::PerEdge:
      if (values.size() != m) throw ScenarioError("initial capacity list must have one entry per edge");
      for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError("initial capacities must be positive");
      }
      return;
    case Kind::RandomUniform:
      if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw ScenarioError("random_uniform needs 0 < lo <= hi");
      }
      return;
  }
}

std::vector<double> InitialCapacity::sample(std::size_t m, std::optional<std::uint64_t> seed_override) const {
  validate(m);
  switch (kind) {
    case Kind::Uniform: return std::vector<double>(m, value);
    case Kind::PerEdge: return values;
    case Kind::RandomUniform: break;
  }
  std::mt19937_64 rng(seed_override.value_or(seed));
  std::vector<double> x(m);
  // 53 random bits per draw keeps the sequence independent of the standard
  // library's distribution implementation.
  for (auto& v : x) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = lo + (hi - lo) * u;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Ring and bow-tie

Scenario ring_scenario(std::uint64_t seed) {
  const std::vector<GraphEdge> edges = {{0, 1, 1.0, "ab"}, {1, 2, 1.0, "bc"}, {2, 0, 1.0, "ca"}};
  const std::vector<DemandSpec> demands = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  Instance inst = Instance::from_graph({"a", "b", "c"}, edges, demands);
  const double r = 1.0;
  std::vector<Point> pos = {{0.0, 0.0}, {2.0 * r, 0.0}, {r, std::sqrt(3.0) * r}};
  return Scenario{"ring", std::move(inst), InitialCapacity::random_uniform(0.001, 1.0, seed), demands, pos,
                  {0, 1, 2}, std::nullopt};
}

Scenario bowtie_scenario(double middle_cost, std::uint64_t seed) {
  if (!(middle_cost > 0.0)) throw ScenarioError("bow-tie middle edge cost must be positive");
  std::vector<GraphEdge> edges = {
      {0, 1, 10.0, "top"}, {4, 5, 10.0, "bottom"}, {0, 2, 1.0, "v02"},
      {4, 2, 1.0, "v42"},  {1, 3, 1.0, "v13"},     {5, 3, 1.0, "v53"},
  };
  if (std::isfinite(middle_cost)) edges.push_back({2, 3, middle_cost, "middle"});
  const std::vector<DemandSpec> demands = {{0, 1, 1.0}, {4, 5, 1.0}};
  Instance inst = Instance::from_graph({"0", "1", "2", "3", "4", "5"}, edges, demands);
  std::vector<Point> pos = {{0, 4}, {10, 4}, {3, 2}, {7, 2}, {0, 0}, {10, 0}};
  return Scenario{"bowtie", std::move(inst), InitialCapacity::random_uniform(1.0, 10.0, seed), demands, pos,
                  {0, 1, 4, 5}, std::nullopt};
}

BowtieEdges bowtie_edges(const Instance& instance) {
  BowtieEdges out;
  bool top = false, bottom = false;
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    const std::string label = instance.edge_label(e);
    if (label == "top") {
      out.top = e;
      top = true;
    } else if (label == "bottom") {
      out.bottom = e;
      bottom = true;
    } else if (label == "middle") {
      out.middle = e;
    }
  }
  if (!top || !bottom) throw ScenarioError("instance is not a bow-tie (missing top/bottom edge labels)");
  return out;
}

// ---------------------------------------------------------------------------
// Polygon grids

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point a, Point b, Point p) {
  if (std::abs(cross(a, b, p)) > 1e-12 * (1.0 + std::abs(b.x - a.x) + std::abs(b.y - a.y))) return false;
  return p.x >= std::min(a.x, b.x) - 1e-12 && p.x <= std::max(a.x, b.x) + 1e-12 &&
         p.y >= std::min(a.y, b.y) - 1e-12 && p.y <= std::max(a.y, b.y) + 1e-12;
}

// Segments ab and cd share a point.
bool segments_touch(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d);
}

bool segment_inside(const std::vector<Point>& poly, Point a, Point b) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (segments_touch(a, b, poly[i], poly[(i + 1) % poly.size()])) return false;
  }
  return true;
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

bool point_strictly_inside(const std::vector<Point>& polygon, Point p) {
  const std::size_t n = polygon.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i], b = polygon[(i + 1) % n];
    if (on_segment(a, b, p)) return false;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

double RegionGrid::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    for (std::size_t j = i + 1; j < polygon.size(); ++j) d = std::max(d, dist(polygon[i], polygon[j]));
  }
  return d;
}

RegionGrid build_region_grid(std::vector<Point> polygon, double spacing, std::uint64_t seed) {
  if (polygon.size() < 3) throw ScenarioError("region polygon needs at least three vertices");
  if (!(spacing > 0.0)) throw ScenarioError("grid spacing must be positive");
  double minx = polygon[0].x, maxx = minx, miny = polygon[0].y, maxy = miny;
  for (const auto& p : polygon) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const long i0 = static_cast<long>(std::floor(minx / spacing)), i1 = static_cast<long>(std::ceil(maxx / spacing));
  const long j0 = static_cast<long>(std::floor(miny / spacing)), j1 = static_cast<long>(std::ceil(maxy / spacing));
  const long width = j1 - j0 + 1;

  RegionGrid grid;
  grid.polygon = std::move(polygon);
  grid.spacing = spacing;
  grid.seed = seed;
  std::vector<int> index(static_cast<std::size_t>((i1 - i0 + 1) * width), -1);
  auto slot = [&](long i, long j) -> int& { return index[static_cast<std::size_t>((i - i0) * width + (j - j0))]; };
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      const Point p{static_cast<double>(i) * spacing, static_cast<double>(j) * spacing};
      if (point_strictly_inside(grid.polygon, p)) {
        slot(i, j) = static_cast<int>(grid.nodes.size());
        grid.nodes.push_back(p);
      }
    }
  }
  if (grid.nodes.empty()) throw ScenarioError("region polygon contains no grid points at this spacing");

  std::mt19937_64 rng(seed);
  constexpr int kSteps[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      const int u = slot(i, j);
      if (u < 0) continue;
      for (const auto& s : kSteps) {
        const long ni = i + s[0], nj = j + s[1];
        if (ni > i1 || nj < j0 || nj > j1) continue;
        const int v = slot(ni, nj);
        if (v < 0 || !segment_inside(grid.polygon, grid.nodes[u], grid.nodes[v])) continue;
        const int r = static_cast<int>(rng() % 7) - 3;
        const double base = (s[0] != 0 && s[1] != 0) ? 1.41 : 1.0;
        grid.edges.push_back({u, v, (base + 0.05 * r) * spacing});
      }
    }
  }
  return grid;
}

std::vector<DemandSpec> demands_by_threshold(const RegionGrid& grid, const TerminalSet& terminals) {
  if (!(terminals.threshold > 0.0)) throw ScenarioError("demand threshold must be positive");
  std::vector<DemandSpec> out;
  const auto& t = terminals.nodes;
  for (int node : t) {
    if (node < 0 || static_cast<std::size_t>(node) >= grid.nodes.size()) throw ScenarioError("terminal is not a grid node");
  }
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = a + 1; b < t.size(); ++b) {
      if (dist(grid.nodes[t[a]], grid.nodes[t[b]]) >= terminals.threshold) continue;
      const bool hub = terminals.hub && (t[a] == *terminals.hub || t[b] == *terminals.hub);
      double amount = TerminalSet::kHubAmount;
      if (!hub) amount = terminals.weights.empty() ? 1.0 : std::min(terminals.weights[a], terminals.weights[b]);
      out.push_back({t[a], t[b], amount});
    }
  }
  return out;
}

TerminalSet pick_terminals(const RegionGrid& grid, std::size_t count, double threshold_fraction, std::uint64_t seed) {
  if (count < 2 || count > grid.nodes.size()) throw ScenarioError("terminal count must be in [2, number of nodes]");
  std::vector<int> order(grid.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  TerminalSet ts;
  ts.nodes.assign(order.begin(), order.begin() + static_cast<long>(count));
  ts.hub = ts.nodes.front();
  double diam = 0.0;
  for (int a : ts.nodes) {
    for (int b : ts.nodes) diam = std::max(diam, dist(grid.nodes[a], grid.nodes[b]));
  }
  ts.threshold = threshold_fraction * diam;
  return ts;
}

Scenario grid_region_scenario(const RegionGrid& grid, const TerminalSet& terminals) {
  std::vector<std::string> ids(grid.nodes.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "v" + std::to_string(i);
  std::vector<GraphEdge> edges;
  edges.reserve(grid.edges.size());
  for (const auto& e : grid.edges) edges.push_back({e.u, e.v, e.length, ""});
  const auto demands = demands_by_threshold(grid, terminals);
  if (demands.empty()) throw ScenarioError("no terminal pair lies within the demand threshold");
  Instance inst = Instance::from_graph(std::move(ids), edges, demands);
  return Scenario{"grid", std::move(inst), InitialCapacity::uniform(0.5), demands, grid.nodes, terminals.nodes,
                  terminals.hub};
}

Scenario lattice_scenario(int rows, int cols, std::span<const DemandSpec> demands) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw ScenarioError("lattice needs at least two nodes");
  std::vector<std::string> ids;
  std::vector<Point> pos;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ids.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
      pos.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
  }
  std::vector<GraphEdge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int u = r * cols + c;
      if (c + 1 < cols) edges.push_back({u, u + 1, 1.0, ""});
      if (r + 1 < rows) edges.push_back({u, u + cols, 1.0, ""});
    }
  }
  std::vector<int> terms;
  for (const auto& d : demands) {
    terms.push_back(d.source);
    terms.push_back(d.sink);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  Instance inst = Instance::from_graph(std::move(ids), edges, demands);
  return Scenario{"lattice", std::move(inst), InitialCapacity::uniform(0.5),
                  std::vector<DemandSpec>(demands.begin(), demands.end()), pos, terms, std::nullopt};
}

std::vector<Point> synthetic_region_polygon() {
  // Irregular bay-shaped outline, offset so no lattice point sits on it.
  return {{-0.3, -0.2}, {13.7, -1.2}, {21.7, 2.8},  {23.7, 11.8}, {18.7, 19.8}, {14.7, 17.8},
          {12.7, 12.8}, {9.7, 11.8},  {7.7, 16.8},  {1.7, 18.8},  {-2.3, 10.8}};
}

// ---------------------------------------------------------------------------
// Pruning and baselines

namespace {

struct Adjacency {
  std::vector<std::vector<std::pair<int, std::size_t>>> out;  // (neighbour, edge)
};

Adjacency adjacency(const Instance& instance, const std::vector<bool>* keep) {
  if (!instance.is_incidence()) throw Error("graph operation requires an incidence instance");
  Adjacency adj;
  adj.out.resize(instance.num_nodes());
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    if (keep && !(*keep)[e]) continue;
    const auto rows = instance.column_rows(e);
    adj.out[rows[0]].push_back({rows[1], e});
    adj.out[rows[1]].push_back({rows[0], e});
  }
  return adj;
}

// Nodes carrying a nonzero entry in commodity column i.
std::vector<int> demand_nodes(const Instance& instance, std::size_t i) {
  std::vector<int> nodes;
  const auto& b = instance.demands();
  for (std::size_t v = 0; v < b.rows(); ++v) {
    if (b(v, i) != 0.0) nodes.push_back(static_cast<int>(v));
  }
  return nodes;
}

}  // namespace

PrunedNetwork prune_degree_one(const Instance& instance, std::span<const double> x, const std::vector<int>& terminals,
                               double capacity_threshold) {
  const std::size_t n = instance.num_nodes(), m = instance.num_edges();
  if (x.size() != m) throw Error("capacity vector has wrong length");
  PrunedNetwork net;
  net.edge_kept.assign(m, true);
  for (std::size_t e = 0; e < m; ++e) net.edge_kept[e] = x[e] >= capacity_threshold;

  std::vector<bool> terminal(n, false);
  for (int t : terminals) terminal.at(static_cast<std::size_t>(t)) = true;
  const Adjacency full = adjacency(instance, nullptr);
  std::vector<int> degree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [w, e] : full.out[v]) degree[v] += net.edge_kept[e] ? 1 : 0;
  }
  std::vector<int> stack;
  for (std::size_t v = 0; v < n; ++v) {
    if (!terminal[v] && degree[v] == 1) stack.push_back(static_cast<int>(v));
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (degree[v] != 1) continue;
    for (const auto& [w, e] : full.out[v]) {
      if (!net.edge_kept[e]) continue;
      net.edge_kept[e] = false;
      --degree[v];
      if (--degree[w] == 1 && !terminal[w]) stack.push_back(w);
    }
  }
  net.node_kept.assign(n, false);
  for (std::size_t v = 0; v < n; ++v) net.node_kept[v] = terminal[v] || degree[v] > 0;
  for (std::size_t e = 0; e < m; ++e) net.edges_removed += net.edge_kept[e] ? 0 : 1;
  for (std::size_t v = 0; v < n; ++v) net.nodes_removed += net.node_kept[v] ? 0 : 1;

  // Connectivity of every demand on the surviving edges.
  const Adjacency kept = adjacency(instance, &net.edge_kept);
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> todo{static_cast<int>(s)};
    comp[s] = next;
    while (!todo.empty()) {
      const int v = todo.back();
      todo.pop_back();
      for (const auto& [w, e] : kept.out[v]) {
        if (comp[w] < 0) {
          comp[w] = next;
          todo.push_back(w);
        }
      }
    }
    ++next;
  }
  for (std::size_t i = 0; i < instance.num_commodities(); ++i) {
    const auto nodes = demand_nodes(instance, i);
    for (int v : nodes) {
      if (comp[v] != comp[nodes.front()]) {
        throw PruneError(nodes.front(), v,
                         "pruning disconnects demand " + std::to_string(i) + " between " +
                             instance.node_ids()[nodes.front()] + " and " + instance.node_ids()[v]);
      }
    }
  }
  return net;
}

double shortest_path_length(const Instance& instance, int source, int sink) {
  const Adjacency adj = adjacency(instance, nullptr);
  const auto& c = instance.costs();
  std::vector<double> d(instance.num_nodes(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d.at(static_cast<std::size_t>(source)) = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v]) continue;
    if (v == sink) return dv;
    for (const auto& [w, e] : adj.out[v]) {
      if (dv + c[e] < d[w]) {
        d[w] = dv + c[e];
        pq.push({d[w], w});
      }
    }
  }
  return d.at(static_cast<std::size_t>(sink));
}

BaselineReport shortest_path_union_baseline(const Instance& instance) {
  BaselineReport rep;
  const auto& b = instance.demands();
  for (std::size_t i = 0; i < instance.num_commodities(); ++i) {
    const auto nodes = demand_nodes(instance, i);
    if (nodes.size() != 2 || b(nodes[0], i) != -b(nodes[1], i)) {
      throw Error("baseline needs single source/sink demands");
    }
    const double amount = std::abs(b(nodes[0], i));
    const double len = shortest_path_length(instance, nodes[0], nodes[1]);
    // x = amount on each path edge: cost amount*len, energy sum (c/x) amount^2.
    rep.cost += amount * len;
    rep.energy += amount * len;
  }
  return rep;
}

}  // namespace physnet
