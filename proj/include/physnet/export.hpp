#pragma once
// Graphviz DOT and SVG renderings of a capacity state. Edge thickness is
// proportional to x_e. Output is byte-for-byte deterministic.

#include "physnet/model.hpp"
#include "physnet/scenarios.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace physnet {

struct DrawingOptions {
  std::vector<Point> positions;   // empty: nodes on a circle
  std::vector<int> terminals;     // highlighted
  std::vector<bool> edge_mask;    // empty: draw every edge
  double max_width = 8.0;         // width of the thickest edge
  double min_visible = 0.0;       // skip edges thinner than this after scaling
};

// Undirected DOT graph; penwidth = max_width * x_e / max x, label = x_e (%.3f).
std::string to_dot(const Instance& instance, std::span<const double> x, const DrawingOptions& options = {});

// Stand-alone SVG with line and circle primitives only.
std::string to_svg(const Instance& instance, std::span<const double> x, const DrawingOptions& options = {});

}  // namespace physnet
