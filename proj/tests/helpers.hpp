#pragma once

#include "physnet/model.hpp"
#include "physnet/scenarios.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace testutil {

using physnet::DemandSpec;
using physnet::GraphEdge;
using physnet::Instance;

inline Instance single_edge(double cost = 1.0, double amount = 1.0) {
  const std::vector<GraphEdge> edges = {{0, 1, cost, "uv"}};
  const std::vector<DemandSpec> demands = {{0, 1, amount}};
  return Instance::from_graph({"u", "v"}, edges, demands);
}

inline Instance parallel_edges(double c1 = 1.0, double c2 = 1.0) {
  const std::vector<GraphEdge> edges = {{0, 1, c1, "p1"}, {0, 1, c2, "p2"}};
  const std::vector<DemandSpec> demands = {{0, 1, 1.0}};
  return Instance::from_graph({"s", "t"}, edges, demands);
}

inline Instance ring() { return physnet::ring_scenario().instance; }

struct RandomGraph {
  std::vector<GraphEdge> edges;
  std::vector<DemandSpec> demands;
  std::vector<std::string> ids;
};

// Connected multigraph: random spanning tree plus extra edges, k demands.
inline RandomGraph random_graph(std::mt19937_64& rng, int n, int m, int k, double cmin = 0.5, double cmax = 3.0) {
  RandomGraph g;
  std::uniform_real_distribution<double> cost(cmin, cmax);
  for (int v = 0; v < n; ++v) g.ids.push_back("n" + std::to_string(v));
  for (int v = 1; v < n; ++v) {
    const int u = static_cast<int>(rng() % static_cast<unsigned>(v));
    g.edges.push_back({u, v, cost(rng), ""});
  }
  while (static_cast<int>(g.edges.size()) < m) {
    const int u = static_cast<int>(rng() % static_cast<unsigned>(n));
    const int v = static_cast<int>(rng() % static_cast<unsigned>(n));
    if (u != v) g.edges.push_back({u, v, cost(rng), ""});
  }
  std::uniform_real_distribution<double> amt(0.5, 2.0);
  while (static_cast<int>(g.demands.size()) < k) {
    const int s = static_cast<int>(rng() % static_cast<unsigned>(n));
    const int t = static_cast<int>(rng() % static_cast<unsigned>(n));
    if (s != t) g.demands.push_back({s, t, amt(rng)});
  }
  return g;
}

inline Instance random_instance(std::mt19937_64& rng, int n, int m, int k) {
  auto g = random_graph(rng, n, m, k);
  return Instance::from_graph(g.ids, g.edges, g.demands);
}

inline std::vector<double> random_positive(std::mt19937_64& rng, std::size_t m, double lo = 0.2, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> x(m);
  for (auto& v : x) v = d(rng);
  return x;
}

inline Eigen::MatrixXd to_eigen(const physnet::DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  }
  return out;
}

// Minimum-energy flow via the pseudo-inverse: q = R^-1 A^T (A R^-1 A^T)^+ b.
inline Eigen::MatrixXd pinv_flows(const Instance& inst, const std::vector<double>& x) {
  const Eigen::MatrixXd a = to_eigen(inst.constraint_matrix());
  Eigen::VectorXd w(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) w(e) = x[e] / inst.costs()[e];
  const Eigen::MatrixXd l = a * w.asDiagonal() * a.transpose();
  const Eigen::MatrixXd p = l.completeOrthogonalDecomposition().pseudoInverse() * to_eigen(inst.demands());
  return w.asDiagonal() * a.transpose() * p;
}

}  // namespace testutil
