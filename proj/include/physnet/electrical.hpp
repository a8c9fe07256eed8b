#pragma once
// Weighted Laplacian L(x) = A X C^-1 A^T and per-commodity minimum-energy
// flows. Potentials are made unique by grounding a node set V' whose rows
// of a kernel basis of A^T form a nonsingular block.

#include "physnet/model.hpp"

#include <memory>
#include <span>
#include <vector>

namespace physnet {

// A linear solve that did not reach the requested relative residual.
class SolverFailure : public Error {
 public:
  SolverFailure(std::size_t commodity, double residual, const std::string& what)
      : Error(what), commodity_(commodity), residual_(residual) {}
  std::size_t commodity() const { return commodity_; }
  double residual() const { return residual_; }

 private:
  std::size_t commodity_;
  double residual_;
};

struct GroundingPlan {
  std::vector<int> grounded;  // sorted node indices with potential fixed to 0

  // One node per connected component for incidence matrices (the lowest
  // index, or the highest with `prefer_last`); for general A a pivoted QR
  // selection on a kernel basis of A^T.
  static GroundingPlan for_instance(const Instance& instance, bool prefer_last = false);

  // Explicit node set. Throws Error when the set does not make the
  // potentials unique.
  static GroundingPlan from_nodes(const Instance& instance, std::vector<int> nodes);
};

enum class SolverKind {
  Cg,        // Jacobi-preconditioned conjugate gradient
  Cholesky,  // sparse LDL^T, factored once per state and reused across commodities
  Dense,     // dense LDL^T; only for small instances and cross-checks
};

struct SolverOptions {
  SolverKind kind = SolverKind::Cg;
  double tol = 1e-10;      // relative residual ||A q - b|| / ||b|| per commodity
  int max_iter_factor = 10;  // CG iteration cap is max_iter_factor * n
  bool warm_start = true;  // CG starts from the previous potentials when available
};

std::string_view solver_kind_name(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct FlowSolution {
  DenseMatrix potentials;  // P, n x k
  DenseMatrix flows;       // Q, m x k
  DenseMatrix drops;       // Lambda = C^-1 A^T P, m x k
  std::vector<double> energy_per_commodity;  // (b^i)^T p^i
  std::vector<double> residuals;             // relative residual per commodity
  long iterations = 0;                       // total CG iterations (0 for direct solvers)

  double total_energy() const;
  // ||Lambda_e||_2^2 per edge.
  std::vector<double> drop_sq_norms() const;
  // ||Lambda_e||_1 per edge.
  std::vector<double> drop_abs_sums() const;
};

// Dense n x n Laplacian, for inspection and tests.
DenseMatrix assemble_laplacian(const Instance& instance, std::span<const double> x);

// Reusable solver bound to one instance and grounding plan. The sparsity
// pattern and the direct factorization's symbolic analysis are computed
// once; each solve() only refreshes numeric values.
class ElectricalSolver {
 public:
  ElectricalSolver(const Instance& instance, GroundingPlan grounding, SolverOptions options = {});
  ~ElectricalSolver();
  ElectricalSolver(ElectricalSolver&&) noexcept;
  ElectricalSolver& operator=(ElectricalSolver&&) noexcept;

  // Requires x > 0. Throws SolverFailure when a commodity misses options.tol.
  FlowSolution solve(std::span<const double> x);

  const GroundingPlan& grounding() const { return grounding_; }
  const SolverOptions& options() const { return options_; }

 private:
  struct Impl;
  const Instance* instance_;
  GroundingPlan grounding_;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around ElectricalSolver.
FlowSolution solve_commodities(const Instance& instance, std::span<const double> x, const GroundingPlan& grounding,
                               const SolverOptions& options = {});

// sum_i (b^i)^T p^i.
double energy_dissipation(const Instance& instance, std::span<const double> x, const FlowSolution& flow);
// sum_e sum_i (c_e / x_e) Q_{e,i}^2, the edge-wise form of the same quantity.
double edge_energy(const Instance& instance, std::span<const double> x, const FlowSolution& flow);
// c^T x.
double network_cost(const Instance& instance, std::span<const double> x);

}  // namespace physnet
