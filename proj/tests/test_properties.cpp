// Randomised invariants across modules.

#include "helpers.hpp"

#include "physnet/analysis.hpp"
#include "physnet/dynamics.hpp"
#include "physnet/electrical.hpp"

#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>

using namespace physnet;

namespace {

FlowSolution solve_with(const Instance& inst, const std::vector<double>& x, const GroundingPlan& plan,
                        SolverKind kind = SolverKind::Cg) {
  SolverOptions opt;
  opt.kind = kind;
  return solve_commodities(inst, x, plan, opt);
}

int svd_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * s(0) ? 1 : 0;
  return r;
}

}  // namespace

TEST_CASE("feasibility check agrees with an SVD rank oracle") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> small(-2, 2);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4), m = 1 + static_cast<int>(rng() % 5);
    std::vector<std::vector<double>> a(n, std::vector<double>(m));
    for (auto& row : a) {
      for (auto& v : row) v = small(rng);
    }
    // Half the time build b inside Im A, otherwise draw it freely.
    std::vector<std::vector<double>> b(n, std::vector<double>(1, 0.0));
    if (trial % 2 == 0) {
      for (int e = 0; e < m; ++e) {
        const double w = small(rng);
        for (int r = 0; r < n; ++r) b[r][0] += w * a[r][e];
      }
    } else {
      for (auto& row : b) row[0] = small(rng);
    }
    const DenseMatrix am = DenseMatrix::from_rows(a), bm = DenseMatrix::from_rows(b);
    const Eigen::MatrixXd ae = testutil::to_eigen(am);
    Eigen::MatrixXd aug(n, m + 1);
    aug << ae, testutil::to_eigen(bm);
    const bool oracle = svd_rank(aug) == svd_rank(ae);
    bool accepted = true;
    try {
      (void)Instance::from_matrix(am, std::vector<double>(m, 1.0), bm);
    } catch (const InfeasibleDemand&) {
      accepted = false;
    }
    CHECK(accepted == oracle);
    (oracle ? feasible : infeasible)++;
  }
  CHECK(feasible > 20);
  CHECK(infeasible > 20);
}

TEST_CASE("grounding independence") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = testutil::random_instance(rng, 8, 14, 3);
    const auto x = testutil::random_positive(rng, inst.num_edges());
    const FlowSolution a = solve_with(inst, x, GroundingPlan::for_instance(inst, false));
    const FlowSolution b = solve_with(inst, x, GroundingPlan::for_instance(inst, true));
    for (std::size_t i = 0; i < inst.num_commodities(); ++i) {
      CHECK(a.energy_per_commodity[i] == doctest::Approx(b.energy_per_commodity[i]).epsilon(1e-8));
    }
    for (std::size_t j = 0; j < a.flows.storage().size(); ++j) {
      CHECK(a.flows.storage()[j] == doctest::Approx(b.flows.storage()[j]).epsilon(1e-8).scale(1.0));
    }
    // p^T L(x) p equals b^T p under either grounding.
    const DenseMatrix l = assemble_laplacian(inst, x);
    for (std::size_t i = 0; i < inst.num_commodities(); ++i) {
      const auto p = b.potentials.col(i);
      double quad = 0.0;
      for (std::size_t r = 0; r < l.rows(); ++r) {
        for (std::size_t c = 0; c < l.cols(); ++c) quad += p[r] * l(r, c) * p[c];
      }
      CHECK(quad == doctest::Approx(a.energy_per_commodity[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("general-matrix grounding independence") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // Rank-deficient A: the last row is a combination of the first two.
    const int n = 4, m = 6;
    std::vector<std::vector<double>> a(n, std::vector<double>(m));
    for (int r = 0; r < 3; ++r) {
      for (auto& v : a[r]) v = d(rng);
    }
    for (int e = 0; e < m; ++e) a[3][e] = 0.5 * a[0][e] - 2.0 * a[1][e];
    std::vector<std::vector<double>> b(n, std::vector<double>(1, 0.0));
    for (int e = 0; e < m; ++e) {
      const double w = d(rng);
      for (int r = 0; r < n; ++r) b[r][0] += w * a[r][e];
    }
    const Instance inst = Instance::from_matrix(DenseMatrix::from_rows(a), std::vector<double>(m, 1.0),
                                                DenseMatrix::from_rows(b));
    const auto x = testutil::random_positive(rng, m);
    const FlowSolution f1 = solve_with(inst, x, GroundingPlan::for_instance(inst), SolverKind::Dense);
    const FlowSolution f2 = solve_with(inst, x, GroundingPlan::from_nodes(inst, {0}), SolverKind::Dense);
    const FlowSolution f3 = solve_with(inst, x, GroundingPlan::for_instance(inst), SolverKind::Cg);
    CHECK(f1.total_energy() == doctest::Approx(f2.total_energy()).epsilon(1e-8));
    for (int e = 0; e < m; ++e) {
      CHECK(f1.flows(e, 0) == doctest::Approx(f2.flows(e, 0)).epsilon(1e-8));
      CHECK(f1.flows(e, 0) == doctest::Approx(f3.flows(e, 0)).epsilon(1e-7));
    }
  }
}

TEST_CASE("flow conservation and energy identity") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = testutil::random_instance(rng, 10, 20, 3);
    const auto x = testutil::random_positive(rng, inst.num_edges(), 0.01, 10.0);
    const FlowSolution f = solve_with(inst, x, GroundingPlan::for_instance(inst));
    const DenseMatrix& b = inst.demands();
    double bmax = 0.0;
    for (double v : b.storage()) bmax = std::max(bmax, std::abs(v));
    for (std::size_t i = 0; i < inst.num_commodities(); ++i) {
      const auto aq = inst.apply(f.flows.col(i));
      double err = 0.0;
      for (std::size_t r = 0; r < aq.size(); ++r) err = std::max(err, std::abs(aq[r] - b(r, i)));
      CHECK(err <= 1e-9 * bmax);
      CHECK(f.energy_per_commodity[i] >= 0.0);
    }
    CHECK(energy_dissipation(inst, x, f) == doctest::Approx(edge_energy(inst, x, f)).epsilon(1e-8));
  }
}

TEST_CASE("circulations cannot lower the energy") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = testutil::random_instance(rng, 7, 13, 1);
    const auto x = testutil::random_positive(rng, inst.num_edges());
    const FlowSolution f = solve_with(inst, x, GroundingPlan::for_instance(inst));
    const Eigen::MatrixXd a = testutil::to_eigen(inst.constraint_matrix());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::MatrixXd ker = lu.kernel();
    REQUIRE(ker.cols() >= 1);
    const auto& c = inst.costs();
    auto energy = [&](const Eigen::VectorXd& q) {
      double s = 0.0;
      for (std::size_t e = 0; e < c.size(); ++e) s += c[e] / x[e] * q(e) * q(e);
      return s;
    };
    Eigen::VectorXd q(inst.num_edges());
    for (std::size_t e = 0; e < inst.num_edges(); ++e) q(e) = f.flows(e, 0);
    const double base = energy(q);
    for (Eigen::Index j = 0; j < ker.cols(); ++j) {
      // First order: gradient 2 R q is orthogonal to each circulation.
      double g = 0.0;
      for (std::size_t e = 0; e < c.size(); ++e) g += 2.0 * c[e] / x[e] * q(e) * ker(e, j);
      CHECK(std::abs(g) <= 1e-7 * ker.col(j).norm() * (1.0 + base));
      for (double t : {1e-3, -1e-3, 0.5}) CHECK(energy(q + t * ker.col(j)) >= base - 1e-12);
    }
  }
}

TEST_CASE("analytic gradients match finite differences on 20 instances") {
  std::mt19937_64 rng(2024);
  double worst = 0.0, worst_beta = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const int m = std::min(14, n - 1 + 1 + static_cast<int>(rng() % 6));
    const int k = 1 + static_cast<int>(rng() % 3);
    const Instance inst = testutil::random_instance(rng, n, m, k);
    const auto x = testutil::random_positive(rng, inst.num_edges(), 0.2, 3.0);
    SolverOptions dense;
    dense.kind = SolverKind::Dense;
    const FlowSolution f = solve_commodities(inst, x, GroundingPlan::for_instance(inst), dense);
    const auto ana = lyapunov(inst, x, f).gradient;
    const auto num = finite_difference_gradient(inst, x, 1e-5);
    const auto ana_b = beta_lyapunov(inst, x, f, 0.7).gradient;
    const auto num_b = finite_difference_gradient(inst, x, 1e-5, 0.7);
    for (std::size_t e = 0; e < x.size(); ++e) {
      const double scale = std::max(std::abs(ana[e]), 0.5 * inst.costs()[e]);
      worst = std::max(worst, std::abs(ana[e] - num[e]) / scale);
      const double scale_b = std::max(std::abs(ana_b[e]), 0.5 * inst.costs()[e]);
      worst_beta = std::max(worst_beta, std::abs(ana_b[e] - num_b[e]) / scale_b);
    }
  }
  CHECK(worst <= 1e-5);
  CHECK(worst_beta <= 1e-5);
}

TEST_CASE("zero gradient on unfloored edges at a fixed point") {
  const Scenario s = bowtie_scenario(9.0, 4);
  DynamicsSpec spec;
  spec.step_size = 0.05;
  spec.stop_tol = 1e-8;
  spec.max_steps = 400000;
  const Trajectory t = run(s.instance, s.initial.sample(s.instance.num_edges()), spec);
  REQUIRE(t.status == RunStatus::Converged);
  const FlowSolution f = solve_commodities(s.instance, t.final_x, GroundingPlan::for_instance(s.instance));
  const auto grad = lyapunov(s.instance, t.final_x, f).gradient;
  for (std::size_t e = 0; e < grad.size(); ++e) {
    if (t.final_x[e] > 1e-4) CHECK(std::abs(grad[e]) <= 1e-6);
  }
}

TEST_CASE("random single-commodity certificates equal shortest paths") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance inst = testutil::random_instance(rng, 8, 14, 1);
    DynamicsSpec spec;
    spec.step_size = 0.2;
    spec.max_steps = 400000;
    const Trajectory t = run(inst, std::vector<double>(inst.num_edges(), 1.0), spec);
    REQUIRE(t.status == RunStatus::Converged);
    const FlowSolution f = solve_commodities(inst, t.final_x, GroundingPlan::for_instance(inst));
    const Certificate c = certificate(inst, t.final_x, f);
    int src = -1, dst = -1;
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      if (inst.demands()(v, 0) > 0) src = static_cast<int>(v);
      if (inst.demands()(v, 0) < 0) dst = static_cast<int>(v);
    }
    const double amount = inst.demands()(src, 0);
    const double sp = amount * shortest_path_length(inst, src, dst);
    CHECK(c.primal == doctest::Approx(sp).epsilon(1e-3));
    CHECK(c.dual == doctest::Approx(sp).epsilon(1e-3));
  }
}

TEST_CASE("warm-started and cold CG agree") {
  std::mt19937_64 rng(61);
  const Instance inst = testutil::random_instance(rng, 40, 90, 3);
  SolverOptions warm, cold;
  cold.warm_start = false;
  ElectricalSolver sw(inst, GroundingPlan::for_instance(inst), warm);
  ElectricalSolver sc(inst, GroundingPlan::for_instance(inst), cold);
  auto x = testutil::random_positive(rng, inst.num_edges());
  for (int step = 0; step < 5; ++step) {
    const FlowSolution a = sw.solve(x), b = sc.solve(x);
    for (std::size_t j = 0; j < a.flows.storage().size(); ++j) {
      CHECK(a.flows.storage()[j] == doctest::Approx(b.flows.storage()[j]).epsilon(1e-7).scale(1.0));
    }
    for (auto& v : x) v *= 1.0 + 0.05 * std::sin(v * 13.0);
  }
}
