#include "physnet/dynamics.hpp"

#include "physnet/analysis.hpp"
#include "physnet/simd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace physnet {

// ---------------------------------------------------------------------------
// GFunction

double GFunction::operator()(double z) const {
  switch (kind) {
    case Kind::Identity: return z;
    // Linear reactivities are clamped at zero so g stays nonnegative for d > 1.
    case Kind::Reactive: return std::max(0.0, 1.0 + d * (z - 1.0));
    case Kind::ReactiveSquared: return std::max(0.0, 1.0 + d * (z * z - 1.0));
    case Kind::Power: return std::pow(z, mu);
    case Kind::Saturating: {
      const double zm = std::pow(z, mu);
      return (1.0 + alpha) * zm / (1.0 + alpha * zm);
    }
  }
  return 1.0;
}

void GFunction::validate() const {
  switch (kind) {
    case Kind::Identity: return;
    case Kind::Reactive:
    case Kind::ReactiveSquared:
      if (!(d > 0.0)) throw Error("reactivity d must be positive");
      return;
    case Kind::Power:
      if (!(mu > 0.0)) throw Error("power exponent mu must be positive");
      return;
    case Kind::Saturating:
      if (!(mu > 0.0) || !(alpha > 0.0)) throw Error("saturating g needs alpha > 0 and mu > 0");
      return;
  }
}

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad numeric parameter '" + item + "' in g specification");
    }
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GFunction GFunction::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::vector<double> args = colon == std::string::npos ? std::vector<double>{} : parse_numbers(text.substr(colon + 1));
  auto need = [&](std::size_t count) {
    if (args.size() != count) {
      throw Error("g '" + name + "' expects " + std::to_string(count) + " parameter(s)");
    }
  };
  GFunction g;
  if (name == "identity") {
    need(0);
    g = identity();
  } else if (name == "reactive") {
    need(1);
    g = reactive(args[0]);
  } else if (name == "reactive-squared") {
    need(1);
    g = reactive_squared(args[0]);
  } else if (name == "power") {
    need(1);
    g = power(args[0]);
  } else if (name == "saturating") {
    need(2);
    g = saturating(args[0], args[1]);
  } else {
    throw Error("unknown g function '" + name + "'");
  }
  g.validate();
  return g;
}

std::string GFunction::to_string() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Reactive: return "reactive:" + fmt_double(d);
    case Kind::ReactiveSquared: return "reactive-squared:" + fmt_double(d);
    case Kind::Power: return "power:" + fmt_double(mu);
    case Kind::Saturating: return "saturating:" + fmt_double(alpha) + "," + fmt_double(mu);
  }
  return "identity";
}

// ---------------------------------------------------------------------------
// Spec

std::string_view dynamics_kind_name(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::OneNorm: return "one-norm";
    case DynamicsKind::TwoNorm: return "two-norm";
    case DynamicsKind::Generalized: return "generalized";
    case DynamicsKind::Beta: return "beta";
    case DynamicsKind::Mirror: return "mirror";
  }
  return "unknown";
}

DynamicsKind parse_dynamics_kind(std::string_view name) {
  for (auto k : {DynamicsKind::OneNorm, DynamicsKind::TwoNorm, DynamicsKind::Generalized, DynamicsKind::Beta,
                 DynamicsKind::Mirror}) {
    if (name == dynamics_kind_name(k)) return k;
  }
  throw Error("unknown dynamics '" + std::string(name) + "'");
}

void DynamicsSpec::validate() const {
  if (!(step_size > 0.0 && step_size < 1.0)) throw Error("step size h must lie in (0, 1)");
  if (max_steps < 0) throw Error("max_steps must be nonnegative");
  if (!(stop_tol > 0.0)) throw Error("stop_tol must be positive");
  if (!(capacity_floor > 0.0)) throw Error("capacity_floor must be positive");
  if (kind == DynamicsKind::Generalized) {
    if (!g) throw Error("generalized dynamics requires a g function");
    g->validate();
  } else if (g) {
    throw Error("a g function is only meaningful for the generalized dynamics");
  }
  if (kind == DynamicsKind::Beta) {
    if (!beta || !(*beta > 0.0 && *beta < 2.0)) throw Error("beta dynamics requires beta in (0, 2)");
  }
}

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxSteps: return "max_steps";
    case RunStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Right-hand sides

std::vector<double> rhs(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                        const DynamicsSpec& spec) {
  const std::size_t m = instance.num_edges();
  const auto& c = instance.costs();
  std::vector<double> out(m);
  if (spec.kind == DynamicsKind::OneNorm) {
    const auto l1 = flow.drop_abs_sums();
    for (std::size_t e = 0; e < m; ++e) out[e] = x[e] * (l1[e] - 1.0);
    return out;
  }
  const auto sq = flow.drop_sq_norms();
  switch (spec.kind) {
    case DynamicsKind::TwoNorm:
      for (std::size_t e = 0; e < m; ++e) out[e] = x[e] * (std::sqrt(sq[e]) - 1.0);
      break;
    case DynamicsKind::Generalized: {
      const GFunction& g = *spec.g;
      for (std::size_t e = 0; e < m; ++e) out[e] = x[e] * (g(std::sqrt(sq[e])) - 1.0);
      break;
    }
    case DynamicsKind::Beta: {
      const double beta = *spec.beta;
      for (std::size_t e = 0; e < m; ++e) out[e] = std::pow(x[e], beta) * sq[e] - x[e];
      break;
    }
    case DynamicsKind::Mirror:
      for (std::size_t e = 0; e < m; ++e) out[e] = 0.5 * c[e] * x[e] * (sq[e] - 1.0);
      break;
    case DynamicsKind::OneNorm: break;
  }
  return out;
}

std::vector<double> euler_step(std::span<const double> x, std::span<const double> xdot, double h,
                               double capacity_floor) {
  std::vector<double> out(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) out[e] = std::max(x[e] + h * xdot[e], capacity_floor);
  return out;
}

double fixed_point_residual(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                            const DynamicsSpec& spec) {
  const std::size_t m = instance.num_edges();
  const auto& c = instance.costs();
  double worst = 0.0;
  if (spec.kind == DynamicsKind::OneNorm) {
    const auto l1 = flow.drop_abs_sums();
    for (std::size_t e = 0; e < m; ++e) worst = std::max(worst, std::min(x[e] * c[e], c[e] * std::abs(l1[e] - 1.0)));
    return worst;
  }
  const auto sq = flow.drop_sq_norms();
  if (spec.kind == DynamicsKind::Beta) {
    const double beta = *spec.beta;
    for (std::size_t e = 0; e < m; ++e) {
      const double gap = std::abs(std::pow(x[e], beta - 1.0) * sq[e] - 1.0);
      worst = std::max(worst, std::min(x[e] * c[e], c[e] * gap));
    }
    return worst;
  }
  for (std::size_t e = 0; e < m; ++e) {
    worst = std::max(worst, std::min(x[e] * c[e], c[e] * std::abs(std::sqrt(sq[e]) - 1.0)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

bool has_standard_lyapunov(const Instance& instance, DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::TwoNorm:
    case DynamicsKind::Generalized:
    case DynamicsKind::Mirror: return true;
    case DynamicsKind::OneNorm: return instance.num_commodities() == 1;
    case DynamicsKind::Beta: return false;
  }
  return false;
}

}  // namespace

Trajectory run(const Instance& instance, std::span<const double> x0, const DynamicsSpec& spec,
               const DiagnosticsConfig& diagnostics) {
  spec.validate();
  const std::size_t m = instance.num_edges();
  if (x0.size() != m) throw Error("initial capacity vector has wrong length");
  for (double v : x0) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("initial capacities must be finite and strictly positive");
  }
  const auto& c = instance.costs();
  const double h = spec.step_size;
  const bool is_beta = spec.kind == DynamicsKind::Beta;
  const bool audited = is_beta || has_standard_lyapunov(instance, spec.kind);
  const long record_every = std::max<long>(1, diagnostics.record_every);

  Trajectory traj;
  traj.step_size = h;
  ElectricalSolver solver(instance, GroundingPlan::for_instance(instance), diagnostics.solver);

  const auto bounds = max_flow_bound(instance);
  if (bounds) traj.worst_flow_bound_ratio = 0.0;

  std::vector<double> x(x0.begin(), x0.end());
  double prev_lyap = 0.0;
  double prev_slack = 0.0;
  double bound_budget = 0.0;  // 2 L(x(0)), or 2 (2 - beta) L_beta(x(0)) for beta
  long step = 0;

  for (;; ++step) {
    FlowSolution flow;
    try {
      flow = solver.solve(x);
    } catch (const SolverFailure& err) {
      traj.status = RunStatus::SolverFailure;
      traj.failure = "step " + std::to_string(step) + ": " + err.what();
      break;
    }

    const double cost = network_cost(instance, x);
    const double energy = flow.total_energy();
    const double lyap = is_beta ? beta_lyapunov(instance, x, flow, *spec.beta).value : 0.5 * (cost + energy);
    const double residual = fixed_point_residual(instance, x, flow, spec);

    if (step == 0) {
      bound_budget = is_beta ? 2.0 * (2.0 - *spec.beta) * lyap : 2.0 * lyap;
    } else if (audited) {
      ++traj.lyapunov_checks;
      const double excess = (lyap - prev_lyap) - prev_slack;
      if (excess > 0.0) ++traj.lyapunov_violations;
      traj.worst_lyapunov_excess = traj.lyapunov_checks == 1 ? excess : std::max(traj.worst_lyapunov_excess, excess);
    }

    if (bounds) {
      const auto& bnd = *bounds;
      double worst = *traj.worst_flow_bound_ratio;
      for (std::size_t e = 0; e < m; ++e) {
        const auto q = flow.flows.row(e);
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (bnd[i] > 0.0) worst = std::max(worst, std::abs(q[i]) / bnd[i]);
        }
      }
      traj.worst_flow_bound_ratio = worst;
    }

    if (diagnostics.check_invariants) {
      for (std::size_t e = 0; e < m; ++e) {
        if (!(x[e] > 0.0)) throw InvariantViolation(step, "capacity of edge " + std::to_string(e) + " is not positive");
      }
      if (audited && bound_budget > 0.0) {
        double bounded = cost;
        if (is_beta) {
          bounded = 0.0;
          for (std::size_t e = 0; e < m; ++e) bounded += c[e] * std::pow(x[e], 2.0 - *spec.beta);
        }
        const double ratio = bounded / bound_budget;
        traj.worst_cost_ratio = std::max(traj.worst_cost_ratio, ratio);
        if (ratio > 1.0 + 1e-9) {
          throw InvariantViolation(step, "network cost " + std::to_string(bounded) +
                                             " exceeds twice the initial Lyapunov value " +
                                             std::to_string(bound_budget / 2.0));
        }
      }
    }

    const bool converged = residual <= spec.stop_tol;
    const bool last = converged || step >= spec.max_steps;
    if (step % record_every == 0 || last) {
      TrajectoryRecord rec;
      rec.step = step;
      rec.t = static_cast<double>(step) * h;
      rec.lyapunov = lyap;
      rec.cost = cost;
      rec.energy = energy;
      rec.residual = residual;
      if (diagnostics.compute_gap) rec.gap = certificate(instance, x, flow).gap;
      rec.x = x;
      traj.records.push_back(std::move(rec));
    }
    if (last) {
      traj.status = converged ? RunStatus::Converged : RunStatus::MaxSteps;
      break;
    }

    const std::vector<double> xdot = rhs(instance, x, flow, spec);
    double max_resistance = 0.0;
    for (std::size_t e = 0; e < m; ++e) max_resistance = std::max(max_resistance, c[e] / x[e]);
    const double xdot2 = simd::kernels().dot(xdot.data(), xdot.data(), m);
    prev_slack = 1e-10 * std::abs(lyap) + h * h * xdot2 * max_resistance;
    prev_lyap = lyap;
    x = euler_step(x, xdot, h, spec.capacity_floor);
  }

  traj.steps = step;
  traj.final_x = std::move(x);
  return traj;
}

std::string trajectory_csv(const Instance& instance, const Trajectory& trajectory) {
  const bool with_gap = !trajectory.records.empty() && trajectory.records.front().gap.has_value();
  std::string out = "t,lyapunov,cost,energy,residual";
  if (with_gap) out += ",gap";
  for (std::size_t e = 0; e < instance.num_edges(); ++e) out += "," + instance.edge_label(e);
  out += "\n";
  char buf[64];
  for (const auto& rec : trajectory.records) {
    std::snprintf(buf, sizeof buf, "%.10g", rec.t);
    out += buf;
    for (double v : {rec.lyapunov, rec.cost, rec.energy, rec.residual}) {
      std::snprintf(buf, sizeof buf, ",%.12g", v);
      out += buf;
    }
    if (with_gap) {
      std::snprintf(buf, sizeof buf, ",%.12g", rec.gap.value_or(0.0));
      out += buf;
    }
    for (double v : rec.x) {
      std::snprintf(buf, sizeof buf, ",%.12g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace physnet
