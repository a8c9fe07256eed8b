#include "physnet/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace physnet {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::pair<int, int> endpoints(const Instance& instance, std::size_t e) {
  if (!instance.is_incidence()) throw Error("drawing requires an incidence instance");
  if (const auto& meta = instance.edge_meta()) return {(*meta)[e].tail, (*meta)[e].head};
  const auto rows = instance.column_rows(e);
  const auto vals = instance.column_values(e);
  return vals[0] > 0 ? std::pair{rows[0], rows[1]} : std::pair{rows[1], rows[0]};
}

double max_capacity(std::span<const double> x, const DrawingOptions& options) {
  double xmax = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (options.edge_mask.empty() || options.edge_mask[e]) xmax = std::max(xmax, x[e]);
  }
  return xmax > 0.0 ? xmax : 1.0;
}

bool is_terminal(const DrawingOptions& options, int v) {
  return std::find(options.terminals.begin(), options.terminals.end(), v) != options.terminals.end();
}

void check_sizes(const Instance& instance, std::span<const double> x, const DrawingOptions& options) {
  if (x.size() != instance.num_edges()) throw Error("capacity vector has wrong length");
  if (!options.edge_mask.empty() && options.edge_mask.size() != instance.num_edges()) {
    throw Error("edge mask has wrong length");
  }
  if (!options.positions.empty() && options.positions.size() != instance.num_nodes()) {
    throw Error("node positions have wrong length");
  }
}

}  // namespace

std::string to_dot(const Instance& instance, std::span<const double> x, const DrawingOptions& options) {
  check_sizes(instance, x, options);
  const auto& ids = instance.node_ids();
  const double xmax = max_capacity(x, options);
  std::string out = "graph physnet {\n  node [shape=circle, fontsize=10];\n";
  for (std::size_t v = 0; v < instance.num_nodes(); ++v) {
    out += "  \"" + escape(ids[v]) + "\"";
    std::string attrs;
    if (!options.positions.empty()) {
      attrs += "pos=\"" + fmt("%.4f", options.positions[v].x) + "," + fmt("%.4f", options.positions[v].y) + "!\"";
    }
    if (is_terminal(options, static_cast<int>(v))) {
      if (!attrs.empty()) attrs += ", ";
      attrs += "style=filled, fillcolor=\"#d62728\"";
    }
    if (!attrs.empty()) out += " [" + attrs + "]";
    out += ";\n";
  }
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    if (!options.edge_mask.empty() && !options.edge_mask[e]) continue;
    const double width = options.max_width * x[e] / xmax;
    if (width < options.min_visible) continue;
    const auto [u, v] = endpoints(instance, e);
    out += "  \"" + escape(ids[u]) + "\" -- \"" + escape(ids[v]) + "\" [penwidth=" + fmt("%.4f", width) +
           ", label=\"" + fmt("%.3f", x[e]) + "\"];\n";
  }
  out += "}\n";
  return out;
}

std::string to_svg(const Instance& instance, std::span<const double> x, const DrawingOptions& options) {
  check_sizes(instance, x, options);
  const std::size_t n = instance.num_nodes();
  std::vector<Point> pos = options.positions;
  if (pos.empty()) {
    pos.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(std::max<std::size_t>(n, 1));
      pos[v] = {std::cos(a), std::sin(a)};
    }
  }
  double minx = pos[0].x, maxx = minx, miny = pos[0].y, maxy = miny;
  for (const auto& p : pos) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double size = 800.0, margin = 40.0;
  const double span = std::max({maxx - minx, maxy - miny, 1e-9});
  const double scale = (size - 2.0 * margin) / span;
  auto sx = [&](double v) { return margin + (v - minx) * scale; };
  auto sy = [&](double v) { return size - margin - (v - miny) * scale; };  // y axis up

  const double xmax = max_capacity(x, options);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  out += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n<g stroke=\"#1f3b73\" stroke-linecap=\"round\">\n";
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    if (!options.edge_mask.empty() && !options.edge_mask[e]) continue;
    const double width = options.max_width * x[e] / xmax;
    if (width < options.min_visible) continue;
    const auto [u, v] = endpoints(instance, e);
    out += "<line x1=\"" + fmt("%.2f", sx(pos[u].x)) + "\" y1=\"" + fmt("%.2f", sy(pos[u].y)) + "\" x2=\"" +
           fmt("%.2f", sx(pos[v].x)) + "\" y2=\"" + fmt("%.2f", sy(pos[v].y)) + "\" stroke-width=\"" +
           fmt("%.3f", width) + "\"><title>" + xml_escape(instance.edge_label(e)) + " x=" + fmt("%.4g", x[e]) +
           "</title></line>\n";
  }
  out += "</g>\n<g>\n";
  for (std::size_t v = 0; v < n; ++v) {
    const bool term = is_terminal(options, static_cast<int>(v));
    out += "<circle cx=\"" + fmt("%.2f", sx(pos[v].x)) + "\" cy=\"" + fmt("%.2f", sy(pos[v].y)) + "\" r=\"" +
           (term ? std::string("6") : std::string("1.5")) + "\" fill=\"" + (term ? "#d62728" : "#888888") +
           "\"><title>" + xml_escape(instance.node_ids()[v]) + "</title></circle>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace physnet
