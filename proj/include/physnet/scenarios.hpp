#pragma once
// Case-study generators (ring, bow-tie, polygon grid), threshold demands,
// degree-one pruning and the separate-routing baseline.

#include "physnet/model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace physnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Initial capacities x(0): a constant, an explicit vector, or i.i.d.
// uniform draws on [lo, hi].
struct InitialCapacity {
  enum class Kind { Uniform, PerEdge, RandomUniform };
  Kind kind = Kind::Uniform;
  double value = 1.0;
  std::vector<double> values;
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 0;

  static InitialCapacity uniform(double v) { return {Kind::Uniform, v, {}, 0.0, 1.0, 0}; }
  static InitialCapacity per_edge(std::vector<double> v) { return {Kind::PerEdge, 1.0, std::move(v), 0.0, 1.0, 0}; }
  static InitialCapacity random_uniform(double lo, double hi, std::uint64_t seed) {
    return {Kind::RandomUniform, 1.0, {}, lo, hi, seed};
  }

  // x(0) for m edges; `seed` overrides the stored seed for random draws.
  std::vector<double> sample(std::size_t m, std::optional<std::uint64_t> seed = std::nullopt) const;
  void validate(std::size_t m) const;
};

struct Scenario {
  std::string name;
  Instance instance;
  InitialCapacity initial;
  std::vector<DemandSpec> demands;  // graph scenarios only
  std::vector<Point> positions;     // optional node coordinates for drawing
  std::vector<int> terminals;
  std::optional<int> hub;
};

// Triangle a, b, c with unit costs and a unit demand between every pair.
// x(0) ~ U[0.001, 1].
Scenario ring_scenario(std::uint64_t seed = 1);

// Bow-tie graph; nodes 0..5, demands 0->1 and 4->5. Edge order: top (0,1),
// bottom (4,5), verticals (0,2) (4,2) (1,3) (5,3), then middle (2,3) unless
// middle_cost is infinite. x(0) ~ U[1, 10]. Throws ScenarioError for
// nonpositive L.
Scenario bowtie_scenario(double middle_cost = std::numeric_limits<double>::infinity(), std::uint64_t seed = 1);

// Edge indices of the horizontal edges in a bow-tie scenario.
struct BowtieEdges {
  std::size_t top = 0;
  std::size_t bottom = 1;
  std::optional<std::size_t> middle;
};
BowtieEdges bowtie_edges(const Instance& instance);

struct GridEdge {
  int u = 0;
  int v = 0;
  double length = 1.0;
};

struct RegionGrid {
  std::vector<Point> polygon;
  double spacing = 1.0;
  std::uint64_t seed = 0;
  std::vector<Point> nodes;
  std::vector<GridEdge> edges;

  double diameter() const;
};

// Lattice points (i * spacing, j * spacing) strictly inside the polygon,
// joined to their up to eight neighbours when the segment stays inside.
// Lengths are (1 or 1.41 + 0.05 r) * spacing with r uniform in {-3..3}.
// Throws ScenarioError when no lattice point falls inside.
RegionGrid build_region_grid(std::vector<Point> polygon, double spacing, std::uint64_t seed);

// Point-in-polygon by ray casting; boundary points count as outside.
bool point_strictly_inside(const std::vector<Point>& polygon, Point p);

struct TerminalSet {
  std::vector<int> nodes;
  std::vector<double> weights;  // default 1 per terminal
  double threshold = 1.0;       // Euclidean distance cutoff
  std::optional<int> hub;       // demands touching the hub get amount 7
  static constexpr double kHubAmount = 7.0;
};

// One demand per unordered terminal pair closer than the threshold.
std::vector<DemandSpec> demands_by_threshold(const RegionGrid& grid, const TerminalSet& terminals);

// `count` distinct lattice nodes drawn from the seed, the first being the hub.
TerminalSet pick_terminals(const RegionGrid& grid, std::size_t count, double threshold_fraction,
                           std::uint64_t seed);

// Grid graph scenario with x(0) = 0.5.
Scenario grid_region_scenario(const RegionGrid& grid, const TerminalSet& terminals);

// Axis-aligned rows x cols lattice (4-neighbour, unit length) with x(0) = 0.5.
Scenario lattice_scenario(int rows, int cols, std::span<const DemandSpec> demands);

// Synthetic coastline-like polygon used by the shipped grid scenario.
std::vector<Point> synthetic_region_polygon();

class PruneError : public Error {
 public:
  PruneError(int source, int sink, const std::string& what)
      : Error(what), source_(source), sink_(sink) {}
  int source() const { return source_; }
  int sink() const { return sink_; }

 private:
  int source_;
  int sink_;
};

struct PrunedNetwork {
  std::vector<bool> edge_kept;
  std::vector<bool> node_kept;
  std::size_t edges_removed = 0;
  std::size_t nodes_removed = 0;
};

// Drops edges with x_e < threshold, then strips non-terminal nodes of degree
// one until none remain. Throws PruneError when a demand pair ends up
// disconnected. Incidence instances only.
PrunedNetwork prune_degree_one(const Instance& instance, std::span<const double> x, const std::vector<int>& terminals,
                               double capacity_threshold = 1e-3);

struct BaselineReport {
  double cost = 0.0;
  double energy = 0.0;
  double total() const { return cost + energy; }
};

// Every demand routed alone on its own cheapest path with x = amount on the
// path edges: cost = energy = sum_i amount_i * length_i.
BaselineReport shortest_path_union_baseline(const Instance& instance);

// Cheapest undirected path length between two nodes (infinity if none).
double shortest_path_length(const Instance& instance, int source, int sink);

}  // namespace physnet
