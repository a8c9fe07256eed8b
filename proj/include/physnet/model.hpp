#pragma once
// Problem instances: constraint matrix A (n x m), edge costs c, demand
// matrix B (n x k), plus the graph-layer conveniences used by scenarios.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace physnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid scenario input.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// A demand column that does not lie in the image of A.
class InfeasibleDemand : public ScenarioError {
 public:
  InfeasibleDemand(std::size_t commodity, const std::string& what)
      : ScenarioError("infeasible demand " + std::to_string(commodity) + ": " + what), commodity_(commodity) {}
  std::size_t commodity() const { return commodity_; }

 private:
  std::size_t commodity_;
};

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& storage() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GraphEdge {
  int u = 0;  // tail, +1 entry
  int v = 0;  // head, -1 entry
  double cost = 1.0;
  std::string label;
};

struct EdgeMeta {
  int tail = 0;
  int head = 0;
  std::string label;
};

// Demand of `amount` units from source to sink. Column of B is
// amount * (e_source - e_sink).
struct DemandSpec {
  int source = 0;
  int sink = 0;
  double amount = 1.0;
};

// Node-arc incidence matrix: column e has +1 at edges[e].u and -1 at
// edges[e].v. Throws ScenarioError on self-loops or out-of-range nodes.
DenseMatrix incidence_of_graph(std::size_t num_nodes, std::span<const GraphEdge> edges);

// Validated immutable instance. Safe to share read-only across threads.
class Instance {
 public:
  // General real A. Feasibility of every column of B is checked by a rank
  // test. A is inspected for incidence structure (one +1, one -1 per column).
  static Instance from_matrix(const DenseMatrix& a, std::vector<double> costs, const DenseMatrix& b);

  // Graph variant. Demands must connect nodes of the same component.
  static Instance from_graph(std::vector<std::string> node_ids, std::span<const GraphEdge> edges,
                             std::span<const DemandSpec> demands);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return costs_.size(); }
  std::size_t num_commodities() const { return b_.cols(); }

  const std::vector<double>& costs() const { return costs_; }
  const DenseMatrix& demands() const { return b_; }

  // Nonzeros of column e of A.
  std::span<const std::int32_t> column_rows(std::size_t e) const {
    return {row_idx_.data() + col_ptr_[e], static_cast<std::size_t>(col_ptr_[e + 1] - col_ptr_[e])};
  }
  std::span<const double> column_values(std::size_t e) const {
    return {values_.data() + col_ptr_[e], static_cast<std::size_t>(col_ptr_[e + 1] - col_ptr_[e])};
  }

  DenseMatrix constraint_matrix() const;

  // True when every column has exactly one +1 and one -1.
  bool is_incidence() const { return incidence_; }
  // Present only for graph-built instances.
  const std::optional<std::vector<EdgeMeta>>& edge_meta() const { return edge_meta_; }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  std::string edge_label(std::size_t e) const;

  // Connected component per node; meaningful only for incidence instances.
  const std::vector<int>& components() const { return component_; }
  int num_components() const { return num_components_; }

  // A x for a length-m vector.
  std::vector<double> apply(std::span<const double> f) const;
  // A^T p for a length-n vector.
  std::vector<double> apply_transpose(std::span<const double> p) const;

 private:
  Instance() = default;
  void build_columns(const DenseMatrix& a);
  void validate_common() const;
  void compute_components();

  std::size_t n_ = 0;
  std::vector<double> costs_;
  DenseMatrix b_;
  std::vector<std::int32_t> col_ptr_;
  std::vector<std::int32_t> row_idx_;
  std::vector<double> values_;
  bool incidence_ = false;
  std::optional<std::vector<EdgeMeta>> edge_meta_;
  std::vector<std::string> node_ids_;
  std::vector<int> component_;
  int num_components_ = 0;
};

// Largest |det| over all square submatrices of A.
double max_subdeterminant(const DenseMatrix& a);

// Per-commodity bound D * ||b^i||_1 on every |Q_{e,i}|. D = 1 for incidence
// matrices; for general A, D is enumerated when n, m <= 6, otherwise
// the bound is unavailable (nullopt).
std::optional<std::vector<double>> max_flow_bound(const Instance& instance);

}  // namespace physnet
