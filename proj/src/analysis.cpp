#include "physnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace physnet {

LyapunovReport lyapunov(const Instance& instance, std::span<const double> x, const FlowSolution& flow) {
  LyapunovReport rep;
  rep.cost = network_cost(instance, x);
  rep.energy = flow.total_energy();
  rep.value = 0.5 * (rep.cost + rep.energy);
  const auto sq = flow.drop_sq_norms();
  const auto& c = instance.costs();
  rep.gradient.resize(c.size());
  for (std::size_t e = 0; e < c.size(); ++e) rep.gradient[e] = 0.5 * c[e] * (1.0 - sq[e]);
  return rep;
}

BetaLyapunovReport beta_lyapunov(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                                 double beta) {
  const auto& c = instance.costs();
  const auto sq = flow.drop_sq_norms();
  BetaLyapunovReport rep;
  rep.gradient.resize(c.size());
  double weighted = 0.0;
  for (std::size_t e = 0; e < c.size(); ++e) {
    weighted += c[e] * std::pow(x[e], 2.0 - beta);
    rep.gradient[e] = 0.5 * c[e] * (std::pow(x[e], 1.0 - beta) - sq[e]);
  }
  rep.value = 0.5 * (weighted / (2.0 - beta) + flow.total_energy());
  return rep;
}

double lyapunov_value(const Instance& instance, std::span<const double> x, const SolverOptions& solver,
                      std::optional<double> beta) {
  const FlowSolution flow = solve_commodities(instance, x, GroundingPlan::for_instance(instance), solver);
  if (beta) return beta_lyapunov(instance, x, flow, *beta).value;
  return 0.5 * (network_cost(instance, x) + flow.total_energy());
}

std::vector<double> finite_difference_gradient(const Instance& instance, std::span<const double> x, double eps,
                                               std::optional<double> beta) {
  SolverOptions dense;
  dense.kind = SolverKind::Dense;
  ElectricalSolver solver(instance, GroundingPlan::for_instance(instance), dense);
  auto value = [&](const std::vector<double>& y) {
    const FlowSolution flow = solver.solve(y);
    if (beta) return beta_lyapunov(instance, y, flow, *beta).value;
    return 0.5 * (network_cost(instance, y) + flow.total_energy());
  };
  std::vector<double> grad(x.size());
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (!(x[e] > eps)) throw Error("finite differences need x_e > eps");
    y[e] = x[e] + eps;
    const double up = value(y);
    y[e] = x[e] - eps;
    const double down = value(y);
    y[e] = x[e];
    grad[e] = (up - down) / (2.0 * eps);
  }
  return grad;
}

Certificate certificate(const Instance& instance, std::span<const double> x, const FlowSolution& flow) {
  const auto& c = instance.costs();
  const std::size_t m = c.size();
  const auto sq = flow.drop_sq_norms();
  Certificate cert;
  double max_drop = 0.0;  // max_e ||Lambda_e||_2 = max_e ||A_e^T P||_2 / c_e
  for (std::size_t e = 0; e < m; ++e) {
    const auto q = flow.flows.row(e);
    double q2 = 0.0;
    for (double v : q) q2 += v * v;
    cert.primal += c[e] * std::sqrt(q2);
    max_drop = std::max(max_drop, std::sqrt(sq[e]));
  }
  const double trace = flow.total_energy();
  bool any_demand = false;
  for (double v : instance.demands().storage()) any_demand = any_demand || v != 0.0;
  if (max_drop == 0.0) {
    if (any_demand) throw Error("degenerate potentials: every drop is zero for a nonzero demand");
    cert.gamma = 1.0;
  } else {
    cert.gamma = 1.0 / max_drop;
  }
  cert.dual = cert.gamma * trace;
  cert.lyapunov = 0.5 * (network_cost(instance, x) + trace);
  cert.gap = cert.primal - cert.dual;
  return cert;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

// Minimizes f on [lo, hi] for unimodal f; returns {argmin, value}.
template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (fm <= std::min(f1, f2)) return {mid, fm};
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = std::sqrt(lo * hi);
    return g;
  }
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  return g;
}

}  // namespace

BruteForceResult brute_force_min_lyapunov(const Instance& instance, const BruteForceConfig& config) {
  const std::size_t m = instance.num_edges();
  if (!config.direction && m > 4) throw Error("brute-force minimization is limited to m <= 4 without a direction");
  if (config.direction && config.direction->size() != m) throw Error("direction has wrong length");
  if (config.grid_points < 1 || !(config.hi > 0.0)) throw Error("invalid brute-force grid");
  const double lo = std::max(config.lo, config.floor);
  const double hi = config.hi;
  if (!(lo < hi)) throw Error("brute-force search box is empty");

  SolverOptions dense;
  dense.kind = SolverKind::Dense;
  ElectricalSolver solver(instance, GroundingPlan::for_instance(instance), dense);
  auto value = [&](const std::vector<double>& y) {
    return 0.5 * (network_cost(instance, y) + solver.solve(y).total_energy());
  };
  const auto grid = log_grid(lo, hi, config.grid_points);

  BruteForceResult best;
  best.value = std::numeric_limits<double>::infinity();

  if (config.direction) {
    const auto& dir = *config.direction;
    auto along = [&](double z) {
      std::vector<double> y(m);
      for (std::size_t e = 0; e < m; ++e) y[e] = dir[e] != 0.0 ? std::max(z * dir[e], config.floor) : config.floor;
      return y;
    };
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = value(along(grid[i]));
      if (v < best.value) {
        best.value = v;
        best_i = i;
      }
    }
    const double a = grid[best_i > 0 ? best_i - 1 : 0];
    const double b = grid[std::min(best_i + 1, grid.size() - 1)];
    if (a < b) {
      const auto [z, v] = golden_section([&](double z) { return value(along(z)); }, a, b, config.tol);
      if (v < best.value) {
        best.value = v;
        best.argmin = along(z);
        return best;
      }
    }
    best.argmin = along(grid[best_i]);
    return best;
  }

  // Exhaustive grid, then cyclic coordinate golden-section refinement. L is
  // convex in x, so each coordinate restriction is unimodal.
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> y(m);
  for (;;) {
    for (std::size_t e = 0; e < m; ++e) y[e] = grid[idx[e]];
    const double v = value(y);
    if (v < best.value) {
      best.value = v;
      best.argmin = y;
    }
    std::size_t e = 0;
    while (e < m && ++idx[e] == grid.size()) idx[e++] = 0;
    if (e == m) break;
  }
  std::vector<double> cur = best.argmin;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    const double before = best.value;
    for (std::size_t e = 0; e < m; ++e) {
      auto f = [&](double z) {
        std::vector<double> t = cur;
        t[e] = z;
        return value(t);
      };
      const auto [z, v] = golden_section(f, lo, hi, config.tol);
      if (v < best.value) {
        cur[e] = z;
        best.value = v;
        best.argmin = cur;
      }
    }
    if (before - best.value <= 1e-15 * std::max(1.0, std::abs(best.value))) break;
  }
  return best;
}

double bregman_divergence(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("bregman_divergence: length mismatch");
  double d = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (x[e] > 0.0) d += x[e] * std::log(x[e] / y[e]);
    d += y[e] - x[e];
  }
  return d;
}

BregmanReport bregman_bound_check(const Instance& instance, const Trajectory& trajectory,
                                  std::span<const double> x_star, double slack, double zero_threshold,
                                  const SolverOptions& solver) {
  if (trajectory.records.empty()) throw Error("bregman_bound_check needs a recorded trajectory");
  const auto& x0 = trajectory.records.front().x;
  if (x_star.size() != x0.size()) throw Error("x_star has wrong length");

  BregmanReport rep;
  rep.slack = slack;
  std::vector<double> xs(x_star.begin(), x_star.end());
  std::vector<double> positive = xs;
  for (std::size_t e = 0; e < xs.size(); ++e) {
    if (xs[e] <= zero_threshold) {
      rep.excluded_zero_coordinates = true;
      xs[e] = 0.0;
      positive[e] = zero_threshold;
    }
  }
  rep.divergence = bregman_divergence(xs, x0);
  rep.lyapunov_star = lyapunov_value(instance, positive, solver);

  for (const auto& rec : trajectory.records) {
    if (rec.t < 1.0) continue;
    const double scaled = rec.t * (rec.lyapunov - rep.lyapunov_star);
    rep.series.emplace_back(rec.t, scaled);
    rep.max_scaled_gap = std::max(rep.max_scaled_gap, scaled);
  }
  if (rep.divergence > 0.0) {
    rep.max_ratio = rep.max_scaled_gap / rep.divergence;
  } else {
    rep.max_ratio = rep.max_scaled_gap <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  rep.pass = rep.max_ratio <= 1.0 + slack;
  return rep;
}

}  // namespace physnet
