#include "physnet/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace physnet {

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw ScenarioError("ragged matrix: row " + std::to_string(i));
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> DenseMatrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void DenseMatrix::set_col(std::size_t c, std::span<const double> v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

DenseMatrix incidence_of_graph(std::size_t num_nodes, std::span<const GraphEdge> edges) {
  DenseMatrix a(num_nodes, edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    if (edge.u < 0 || edge.v < 0 || static_cast<std::size_t>(edge.u) >= num_nodes ||
        static_cast<std::size_t>(edge.v) >= num_nodes) {
      throw ScenarioError("edge " + std::to_string(e) + " references an unknown node");
    }
    if (edge.u == edge.v) throw ScenarioError("edge " + std::to_string(e) + " is a self-loop");
    a(edge.u, e) = 1.0;
    a(edge.v, e) = -1.0;
  }
  return a;
}

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

void Instance::build_columns(const DenseMatrix& a) {
  n_ = a.rows();
  const std::size_t m = a.cols();
  col_ptr_.assign(m + 1, 0);
  row_idx_.clear();
  values_.clear();
  incidence_ = m > 0;
  for (std::size_t e = 0; e < m; ++e) {
    int plus = 0, minus = 0, other = 0;
    for (std::size_t r = 0; r < n_; ++r) {
      const double v = a(r, e);
      if (v == 0.0) continue;
      row_idx_.push_back(static_cast<std::int32_t>(r));
      values_.push_back(v);
      if (v == 1.0) ++plus;
      else if (v == -1.0) ++minus;
      else ++other;
    }
    col_ptr_[e + 1] = static_cast<std::int32_t>(row_idx_.size());
    if (!(plus == 1 && minus == 1 && other == 0)) incidence_ = false;
  }
}

void Instance::validate_common() const {
  for (std::size_t e = 0; e < costs_.size(); ++e) {
    if (!(costs_[e] > 0.0) || !std::isfinite(costs_[e])) {
      throw ScenarioError("nonpositive cost on edge " + std::to_string(e));
    }
  }
  if (b_.rows() != n_) throw ScenarioError("demand matrix has wrong number of rows");
  for (double v : b_.storage()) {
    if (!std::isfinite(v)) throw ScenarioError("non-finite demand entry");
  }
}

void Instance::compute_components() {
  std::vector<int> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto rows = column_rows(e);
    for (std::size_t j = 1; j < rows.size(); ++j) {
      const int a = find_root(parent, rows[0]);
      const int b = find_root(parent, rows[j]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  component_.assign(n_, -1);
  std::vector<int> label(n_, -1);
  num_components_ = 0;
  for (std::size_t v = 0; v < n_; ++v) {
    const int r = find_root(parent, static_cast<int>(v));
    if (label[r] < 0) label[r] = num_components_++;
    component_[v] = label[r];
  }
}

Instance Instance::from_matrix(const DenseMatrix& a, std::vector<double> costs, const DenseMatrix& b) {
  if (costs.size() != a.cols()) throw ScenarioError("cost vector length does not match number of columns of A");
  Instance inst;
  inst.build_columns(a);
  inst.costs_ = std::move(costs);
  inst.b_ = b;
  inst.validate_common();
  inst.compute_components();
  inst.node_ids_.reserve(inst.n_);
  for (std::size_t v = 0; v < inst.n_; ++v) inst.node_ids_.push_back(std::to_string(v));

  // Rank test: b in Im A iff rank [A | b] == rank A.
  const Eigen::MatrixXd ea = to_eigen(a);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_a(ea);
  const double scale = std::max(1.0, ea.cwiseAbs().maxCoeff());
  qr_a.setThreshold(1e-10);
  const auto rank_a = qr_a.rank();
  for (std::size_t i = 0; i < b.cols(); ++i) {
    Eigen::MatrixXd aug(ea.rows(), ea.cols() + 1);
    aug.leftCols(ea.cols()) = ea;
    for (std::size_t r = 0; r < b.rows(); ++r) aug(r, ea.cols()) = b(r, i);
    const double bnorm = aug.col(ea.cols()).cwiseAbs().maxCoeff();
    if (bnorm > 0.0) aug.col(ea.cols()) *= scale / bnorm;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_aug(aug);
    qr_aug.setThreshold(1e-10);
    if (qr_aug.rank() > rank_a) throw InfeasibleDemand(i, "right-hand side is not in the image of A");
  }
  return inst;
}

Instance Instance::from_graph(std::vector<std::string> node_ids, std::span<const GraphEdge> edges,
                              std::span<const DemandSpec> demands) {
  const std::size_t n = node_ids.size();
  const DenseMatrix a = incidence_of_graph(n, edges);
  DenseMatrix b(n, demands.size());
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const auto& d = demands[i];
    if (d.source < 0 || d.sink < 0 || static_cast<std::size_t>(d.source) >= n ||
        static_cast<std::size_t>(d.sink) >= n) {
      throw ScenarioError("demand " + std::to_string(i) + " references an unknown node");
    }
    if (d.source == d.sink) throw ScenarioError("demand " + std::to_string(i) + " has source == sink");
    if (!(d.amount > 0.0) || !std::isfinite(d.amount)) {
      throw ScenarioError("demand " + std::to_string(i) + " has nonpositive amount");
    }
    b(d.source, i) += d.amount;
    b(d.sink, i) -= d.amount;
  }

  Instance inst;
  inst.build_columns(a);
  inst.costs_.reserve(edges.size());
  std::vector<EdgeMeta> meta;
  meta.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    inst.costs_.push_back(edges[e].cost);
    meta.push_back({edges[e].u, edges[e].v,
                    edges[e].label.empty() ? node_ids[edges[e].u] + "-" + node_ids[edges[e].v] : edges[e].label});
  }
  inst.edge_meta_ = std::move(meta);
  inst.b_ = std::move(b);
  inst.node_ids_ = std::move(node_ids);
  inst.validate_common();
  inst.compute_components();

  // Per component, every column of B must sum to zero.
  for (std::size_t i = 0; i < inst.b_.cols(); ++i) {
    std::vector<double> sums(inst.num_components_, 0.0);
    double mag = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      sums[inst.component_[v]] += inst.b_(v, i);
      mag = std::max(mag, std::abs(inst.b_(v, i)));
    }
    for (double s : sums) {
      if (std::abs(s) > 1e-12 * std::max(1.0, mag)) {
        throw InfeasibleDemand(i, "source and sink lie in different connected components");
      }
    }
  }
  return inst;
}

DenseMatrix Instance::constraint_matrix() const {
  DenseMatrix a(n_, num_edges());
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto rows = column_rows(e);
    auto vals = column_values(e);
    for (std::size_t j = 0; j < rows.size(); ++j) a(rows[j], e) = vals[j];
  }
  return a;
}

std::string Instance::edge_label(std::size_t e) const {
  if (edge_meta_) return (*edge_meta_)[e].label;
  return "e" + std::to_string(e);
}

std::vector<double> Instance::apply(std::span<const double> f) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto rows = column_rows(e);
    auto vals = column_values(e);
    for (std::size_t j = 0; j < rows.size(); ++j) out[rows[j]] += vals[j] * f[e];
  }
  return out;
}

std::vector<double> Instance::apply_transpose(std::span<const double> p) const {
  std::vector<double> out(num_edges(), 0.0);
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto rows = column_rows(e);
    auto vals = column_values(e);
    double s = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) s += vals[j] * p[rows[j]];
    out[e] = s;
  }
  return out;
}

double max_subdeterminant(const DenseMatrix& a) {
  const std::size_t n = a.rows(), m = a.cols();
  const std::size_t max_order = std::min(n, m);
  double best = 0.0;
  const Eigen::MatrixXd ea = to_eigen(a);
  // Enumerate row and column subsets as bitmasks of equal popcount.
  for (std::uint32_t rmask = 1; rmask < (1u << n); ++rmask) {
    const int order = std::popcount(rmask);
    if (static_cast<std::size_t>(order) > max_order) continue;
    std::vector<int> rows;
    for (std::size_t r = 0; r < n; ++r)
      if (rmask & (1u << r)) rows.push_back(static_cast<int>(r));
    for (std::uint32_t cmask = 1; cmask < (1u << m); ++cmask) {
      if (std::popcount(cmask) != order) continue;
      std::vector<int> cols;
      for (std::size_t c = 0; c < m; ++c)
        if (cmask & (1u << c)) cols.push_back(static_cast<int>(c));
      Eigen::MatrixXd sub(order, order);
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) sub(i, j) = ea(rows[i], cols[j]);
      best = std::max(best, std::abs(sub.determinant()));
    }
  }
  return best;
}

std::optional<std::vector<double>> max_flow_bound(const Instance& instance) {
  double d = 1.0;
  if (!instance.is_incidence()) {
    if (instance.num_nodes() > 6 || instance.num_edges() > 6) return std::nullopt;
    d = max_subdeterminant(instance.constraint_matrix());
  }
  const auto& b = instance.demands();
  std::vector<double> out(b.cols(), 0.0);
  for (std::size_t i = 0; i < b.cols(); ++i) {
    double norm1 = 0.0;
    for (std::size_t r = 0; r < b.rows(); ++r) norm1 += std::abs(b(r, i));
    out[i] = d * norm1;
  }
  return out;
}

}  // namespace physnet
