#include "physnet/electrical.hpp"

#include "physnet/simd.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace physnet {

std::string_view solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Cg: return "cg";
    case SolverKind::Cholesky: return "cholesky";
    case SolverKind::Dense: return "dense";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "cg") return SolverKind::Cg;
  if (name == "cholesky") return SolverKind::Cholesky;
  if (name == "dense") return SolverKind::Dense;
  throw Error("unknown solver '" + std::string(name) + "' (expected cg, cholesky or dense)");
}

double FlowSolution::total_energy() const {
  return std::accumulate(energy_per_commodity.begin(), energy_per_commodity.end(), 0.0);
}

std::vector<double> FlowSolution::drop_sq_norms() const {
  std::vector<double> out(drops.rows());
  simd::kernels().row_sq_norms(drops.data(), drops.rows(), drops.cols(), out.data());
  return out;
}

std::vector<double> FlowSolution::drop_abs_sums() const {
  std::vector<double> out(drops.rows());
  simd::kernels().row_abs_sums(drops.data(), drops.rows(), drops.cols(), out.data());
  return out;
}

DenseMatrix assemble_laplacian(const Instance& instance, std::span<const double> x) {
  const std::size_t n = instance.num_nodes();
  DenseMatrix l(n, n);
  const auto& c = instance.costs();
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    const double w = x[e] / c[e];
    auto rows = instance.column_rows(e);
    auto vals = instance.column_values(e);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows.size(); ++j) l(rows[i], rows[j]) += w * vals[i] * vals[j];
  }
  return l;
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

Eigen::MatrixXd kernel_of_transpose(const Instance& instance) {
  const DenseMatrix a = instance.constraint_matrix();
  Eigen::MatrixXd at(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) at(c, r) = a(r, c);
  if (at.rows() == 0) return Eigen::MatrixXd::Identity(a.rows(), a.rows());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(at);
  lu.setThreshold(1e-10);
  const auto ell = static_cast<Eigen::Index>(a.rows()) - lu.rank();
  if (ell == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::MatrixXd k = lu.kernel();
  return k.leftCols(ell);
}

}  // namespace

GroundingPlan GroundingPlan::for_instance(const Instance& instance, bool prefer_last) {
  GroundingPlan plan;
  if (instance.is_incidence()) {
    std::vector<int> chosen(instance.num_components(), -1);
    const auto& comp = instance.components();
    for (std::size_t v = 0; v < instance.num_nodes(); ++v) {
      int& slot = chosen[comp[v]];
      if (slot < 0 || prefer_last) slot = static_cast<int>(v);
    }
    plan.grounded = std::move(chosen);
    std::sort(plan.grounded.begin(), plan.grounded.end());
    return plan;
  }
  const Eigen::MatrixXd k = kernel_of_transpose(instance);
  if (k.cols() == 0) return plan;
  Eigen::MatrixXd kt = k.transpose();
  if (prefer_last) kt = kt.rowwise().reverse().eval();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kt);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    int v = perm[j];
    if (prefer_last) v = static_cast<int>(instance.num_nodes()) - 1 - v;
    plan.grounded.push_back(v);
  }
  std::sort(plan.grounded.begin(), plan.grounded.end());
  return plan;
}

GroundingPlan GroundingPlan::from_nodes(const Instance& instance, std::vector<int> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (int v : nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= instance.num_nodes()) throw Error("grounded node out of range");
  }
  const Eigen::MatrixXd k = kernel_of_transpose(instance);
  if (static_cast<Eigen::Index>(nodes.size()) != k.cols()) {
    throw Error("grounding set must have size dim Ker A^T = " + std::to_string(k.cols()));
  }
  if (k.cols() > 0) {
    Eigen::MatrixXd sub(k.cols(), k.cols());
    for (Eigen::Index i = 0; i < k.cols(); ++i) sub.row(i) = k.row(nodes[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-10);
    if (lu.rank() != k.cols()) throw Error("grounding set does not make the potentials unique");
  }
  return GroundingPlan{std::move(nodes)};
}

// ---------------------------------------------------------------------------
// Solver

struct ElectricalSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  std::vector<int> reduced;     // node -> reduced index or -1
  std::vector<int> full_of;     // reduced index -> node
  SpMat matrix;                 // grounded Laplacian, both triangles stored
  std::vector<std::int32_t> slot_ptr;  // per edge into slots/coefs
  std::vector<std::int32_t> slots;
  std::vector<double> coefs;
  std::vector<std::int32_t> diag_slot;

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;

  DenseMatrix last_reduced;  // previous reduced potentials, nr x k (warm start)
  bool have_last = false;

  std::vector<double> r, z, p, q, inv_diag, rhs, sol;
};

ElectricalSolver::ElectricalSolver(const Instance& instance, GroundingPlan grounding, SolverOptions options)
    : instance_(&instance), grounding_(std::move(grounding)), options_(options), impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  const std::size_t n = instance.num_nodes();
  im.reduced.assign(n, 0);
  for (int v : grounding_.grounded) im.reduced[v] = -1;
  for (std::size_t v = 0; v < n; ++v) {
    if (im.reduced[v] < 0) continue;
    im.reduced[v] = static_cast<int>(im.full_of.size());
    im.full_of.push_back(static_cast<int>(v));
  }
  const int nr = static_cast<int>(im.full_of.size());

  std::vector<Eigen::Triplet<double, int>> trips;
  for (int i = 0; i < nr; ++i) trips.emplace_back(i, i, 0.0);
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    auto rows = instance.column_rows(e);
    for (auto ri : rows)
      for (auto rj : rows) {
        const int a = im.reduced[ri], b = im.reduced[rj];
        if (a >= 0 && b >= 0) trips.emplace_back(a, b, 0.0);
      }
  }
  im.matrix.resize(nr, nr);
  im.matrix.setFromTriplets(trips.begin(), trips.end());
  im.matrix.makeCompressed();

  const int* outer = im.matrix.outerIndexPtr();
  const int* inner = im.matrix.innerIndexPtr();
  auto find_slot = [&](int row, int col) {
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return static_cast<std::int32_t>(it - inner);
  };
  im.slot_ptr.assign(instance.num_edges() + 1, 0);
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    auto rows = instance.column_rows(e);
    auto vals = instance.column_values(e);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows.size(); ++j) {
        const int a = im.reduced[rows[i]], b = im.reduced[rows[j]];
        if (a < 0 || b < 0) continue;
        im.slots.push_back(find_slot(a, b));
        im.coefs.push_back(vals[i] * vals[j]);
      }
    im.slot_ptr[e + 1] = static_cast<std::int32_t>(im.slots.size());
  }
  im.diag_slot.resize(nr);
  for (int i = 0; i < nr; ++i) im.diag_slot[i] = find_slot(i, i);

  for (auto* v : {&im.r, &im.z, &im.p, &im.q, &im.inv_diag, &im.rhs, &im.sol}) v->assign(nr, 0.0);
}

ElectricalSolver::~ElectricalSolver() = default;
ElectricalSolver::ElectricalSolver(ElectricalSolver&&) noexcept = default;
ElectricalSolver& ElectricalSolver::operator=(ElectricalSolver&&) noexcept = default;

namespace {

// Jacobi-preconditioned CG on the grounded system. Returns iterations used.
// `sol` holds the initial guess on entry.
long pcg(const simd::KernelTable& k, const simd::CsrView& a, const std::vector<double>& inv_diag,
         const std::vector<double>& b, std::vector<double>& sol, std::vector<double>& r, std::vector<double>& z,
         std::vector<double>& p, std::vector<double>& q, double target, long max_iter) {
  const std::size_t n = b.size();
  k.spmv(a, sol.data(), q.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm2 = k.dot(r.data(), r.data(), n);
  const double target2 = target * target;
  if (rnorm2 <= target2) return 0;
  k.mul(inv_diag.data(), r.data(), z.data(), n);
  std::copy(z.begin(), z.end(), p.begin());
  double rz = k.dot(r.data(), z.data(), n);
  long it = 0;
  while (it < max_iter) {
    ++it;
    k.spmv(a, p.data(), q.data());
    const double pq = k.dot(p.data(), q.data(), n);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    k.axpy(alpha, p.data(), sol.data(), n);
    k.axpy(-alpha, q.data(), r.data(), n);
    rnorm2 = k.dot(r.data(), r.data(), n);
    if (rnorm2 <= target2) break;
    k.mul(inv_diag.data(), r.data(), z.data(), n);
    const double rz_new = k.dot(r.data(), z.data(), n);
    k.xpby(z.data(), rz_new / rz, p.data(), n);
    rz = rz_new;
  }
  return it;
}

double relative_residual(const Instance& inst, std::span<const double> x, const DenseMatrix& p, std::size_t i,
                         double bnorm) {
  // || A X C^-1 A^T p - b || / ||b|| over all rows, grounded ones included.
  const std::size_t n = inst.num_nodes();
  std::vector<double> res(n, 0.0);
  const auto& c = inst.costs();
  for (std::size_t e = 0; e < inst.num_edges(); ++e) {
    auto rows = inst.column_rows(e);
    auto vals = inst.column_values(e);
    double drop = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) drop += vals[j] * p(rows[j], i);
    const double f = x[e] / c[e] * drop;
    for (std::size_t j = 0; j < rows.size(); ++j) res[rows[j]] += vals[j] * f;
  }
  const auto& b = inst.demands();
  double s = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double d = res[v] - b(v, i);
    s += d * d;
  }
  return bnorm > 0.0 ? std::sqrt(s) / bnorm : std::sqrt(s);
}

}  // namespace

FlowSolution ElectricalSolver::solve(std::span<const double> x) {
  const Instance& inst = *instance_;
  auto& im = *impl_;
  const std::size_t n = inst.num_nodes();
  const std::size_t m = inst.num_edges();
  const std::size_t k = inst.num_commodities();
  const std::size_t nr = im.full_of.size();
  const auto& c = inst.costs();
  const auto& b = inst.demands();
  const auto& kern = simd::kernels();

  for (std::size_t e = 0; e < m; ++e) {
    if (!(x[e] > 0.0)) throw Error("capacity must be strictly positive (edge " + std::to_string(e) + ")");
  }

  // Numeric refresh of the grounded Laplacian.
  double* val = im.matrix.valuePtr();
  std::fill(val, val + im.matrix.nonZeros(), 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    const double w = x[e] / c[e];
    for (std::int32_t s = im.slot_ptr[e]; s < im.slot_ptr[e + 1]; ++s) val[im.slots[s]] += w * im.coefs[s];
  }

  FlowSolution out;
  out.potentials = DenseMatrix(n, k);
  out.flows = DenseMatrix(m, k);
  out.drops = DenseMatrix(m, k);
  out.energy_per_commodity.assign(k, 0.0);
  out.residuals.assign(k, 0.0);

  std::vector<double> bnorm(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += b(v, i) * b(v, i);
    bnorm[i] = std::sqrt(s);
  }

  DenseMatrix reduced(nr, k);
  if (options_.kind == SolverKind::Cg) {
    for (std::size_t j = 0; j < nr; ++j) {
      const double d = val[im.diag_slot[j]];
      im.inv_diag[j] = d > 0.0 ? 1.0 / d : 1.0;
    }
    const simd::CsrView view{nr, im.matrix.outerIndexPtr(), im.matrix.innerIndexPtr(), val};
    const long max_iter = std::max<long>(20, static_cast<long>(options_.max_iter_factor) * static_cast<long>(n));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < nr; ++j) im.rhs[j] = b(im.full_of[j], i);
      const bool warm = options_.warm_start && im.have_last;
      for (std::size_t j = 0; j < nr; ++j) im.sol[j] = warm ? im.last_reduced(j, i) : 0.0;
      double target = 0.1 * options_.tol * bnorm[i];
      long used = 0;
      for (int attempt = 0; attempt < 4 && used < max_iter; ++attempt) {
        used += pcg(kern, view, im.inv_diag, im.rhs, im.sol, im.r, im.z, im.p, im.q, target, max_iter - used);
        for (std::size_t j = 0; j < nr; ++j) out.potentials(im.full_of[j], i) = im.sol[j];
        out.residuals[i] = relative_residual(inst, x, out.potentials, i, bnorm[i]);
        if (out.residuals[i] <= options_.tol) break;
        target *= 0.1;
      }
      out.iterations += used;
      for (std::size_t j = 0; j < nr; ++j) reduced(j, i) = im.sol[j];
    }
  } else if (options_.kind == SolverKind::Cholesky) {
    if (!im.analyzed) {
      im.ldlt.analyzePattern(im.matrix);
      im.analyzed = true;
    }
    im.ldlt.factorize(im.matrix);
    if (im.ldlt.info() != Eigen::Success) throw SolverFailure(0, INFINITY, "sparse LDL^T factorization failed");
    Eigen::MatrixXd rhs(nr, k);
    for (std::size_t j = 0; j < nr; ++j)
      for (std::size_t i = 0; i < k; ++i) rhs(j, i) = b(im.full_of[j], i);
    const Eigen::MatrixXd solved = im.ldlt.solve(rhs);
    for (std::size_t j = 0; j < nr; ++j)
      for (std::size_t i = 0; i < k; ++i) reduced(j, i) = solved(j, i);
  } else {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(im.matrix);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
    Eigen::MatrixXd rhs(nr, k);
    for (std::size_t j = 0; j < nr; ++j)
      for (std::size_t i = 0; i < k; ++i) rhs(j, i) = b(im.full_of[j], i);
    const Eigen::MatrixXd solved = ldlt.solve(rhs);
    for (std::size_t j = 0; j < nr; ++j)
      for (std::size_t i = 0; i < k; ++i) reduced(j, i) = solved(j, i);
  }

  if (options_.kind != SolverKind::Cg) {
    for (std::size_t j = 0; j < nr; ++j) {
      auto src = reduced.row(j);
      std::copy(src.begin(), src.end(), out.potentials.row(im.full_of[j]).begin());
    }
    for (std::size_t i = 0; i < k; ++i) out.residuals[i] = relative_residual(inst, x, out.potentials, i, bnorm[i]);
  }
  im.last_reduced = std::move(reduced);
  im.have_last = true;

  // Lambda_e = (A_e^T P) / c_e ; Q_e = x_e Lambda_e.
  for (std::size_t e = 0; e < m; ++e) {
    auto rows = inst.column_rows(e);
    auto vals = inst.column_values(e);
    auto drop = out.drops.row(e);
    for (std::size_t j = 0; j < rows.size(); ++j)
      kern.axpy(vals[j] / c[e], out.potentials.row(rows[j]).data(), drop.data(), k);
    auto flow = out.flows.row(e);
    for (std::size_t i = 0; i < k; ++i) flow[i] = x[e] * drop[i];
  }
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += b(v, i) * out.potentials(v, i);
    out.energy_per_commodity[i] = s;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(out.residuals[i] <= options_.tol)) {
      im.have_last = false;
      throw SolverFailure(i, out.residuals[i],
                          "linear solve for commodity " + std::to_string(i) + " stalled at relative residual " +
                              std::to_string(out.residuals[i]));
    }
  }
  return out;
}

FlowSolution solve_commodities(const Instance& instance, std::span<const double> x, const GroundingPlan& grounding,
                               const SolverOptions& options) {
  ElectricalSolver solver(instance, grounding, options);
  return solver.solve(x);
}

double energy_dissipation(const Instance&, std::span<const double>, const FlowSolution& flow) {
  return flow.total_energy();
}

double edge_energy(const Instance& instance, std::span<const double> x, const FlowSolution& flow) {
  const auto& c = instance.costs();
  double s = 0.0;
  for (std::size_t e = 0; e < instance.num_edges(); ++e) {
    const auto q = flow.flows.row(e);
    double q2 = 0.0;
    for (double v : q) q2 += v * v;
    if (q2 > 0.0) s += c[e] / x[e] * q2;
  }
  return s;
}

double network_cost(const Instance& instance, std::span<const double> x) {
  const auto& c = instance.costs();
  double s = 0.0;
  for (std::size_t e = 0; e < c.size(); ++e) s += c[e] * x[e];
  return s;
}

}  // namespace physnet
