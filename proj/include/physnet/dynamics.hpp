#pragma once
// Right-hand sides of the capacity dynamics and the forward Euler driver.

#include "physnet/electrical.hpp"
#include "physnet/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace physnet {

// Reactivity function g applied to ||Lambda_e||_2 in the generalized
// dynamics x' = x (g(||Lambda||) - 1). Every variant satisfies g(1) = 1 and
// is nonnegative and nondecreasing on z >= 0.
struct GFunction {
  enum class Kind { Identity, Reactive, ReactiveSquared, Power, Saturating };

  Kind kind = Kind::Identity;
  double d = 1.0;      // reactivity for Reactive / ReactiveSquared
  double mu = 1.0;     // exponent for Power / Saturating
  double alpha = 1.0;  // saturation for Saturating

  static GFunction identity() { return {}; }
  static GFunction reactive(double d) { return {Kind::Reactive, d, 1.0, 1.0}; }
  static GFunction reactive_squared(double d) { return {Kind::ReactiveSquared, d, 1.0, 1.0}; }
  static GFunction power(double mu) { return {Kind::Power, 1.0, mu, 1.0}; }
  static GFunction saturating(double alpha, double mu) { return {Kind::Saturating, 1.0, mu, alpha}; }

  // "identity", "reactive:D", "reactive-squared:D", "power:MU", "saturating:ALPHA,MU".
  static GFunction parse(const std::string& text);
  std::string to_string() const;

  double operator()(double z) const;
  void validate() const;
};

enum class DynamicsKind { OneNorm, TwoNorm, Generalized, Beta, Mirror };

std::string_view dynamics_kind_name(DynamicsKind kind);
DynamicsKind parse_dynamics_kind(std::string_view name);

struct DynamicsSpec {
  DynamicsKind kind = DynamicsKind::TwoNorm;
  std::optional<GFunction> g;   // required iff kind == Generalized
  std::optional<double> beta;   // required iff kind == Beta, in (0, 2)
  double step_size = 0.01;      // Euler step h in (0, 1)
  long max_steps = 200000;
  double stop_tol = 1e-7;       // fixed-point residual threshold
  double capacity_floor = 1e-9;

  // Throws Error on violated invariants.
  void validate() const;
};

// x' for the selected kind. `flow` must be the solution for x.
std::vector<double> rhs(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                        const DynamicsSpec& spec);

// max(x + h * xdot, floor) elementwise.
std::vector<double> euler_step(std::span<const double> x, std::span<const double> xdot, double h,
                               double capacity_floor);

// max_e min(x_e c_e, c_e |N_e - 1|) with N_e = ||Lambda_e||_1 for the
// one-norm kind and ||Lambda_e||_2 otherwise. For the beta kind the
// stationarity gap is |x_e^{beta-1} ||Lambda_e||^2 - 1| instead.
double fixed_point_residual(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                            const DynamicsSpec& spec);

enum class RunStatus { Converged, MaxSteps, SolverFailure };
std::string_view run_status_name(RunStatus status);

// Raised when a discrete trajectory leaves the region the continuous
// dynamics is known to stay in (positivity, bounded cost).
class InvariantViolation : public Error {
 public:
  InvariantViolation(long step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

struct TrajectoryRecord {
  long step = 0;
  double t = 0.0;
  double lyapunov = 0.0;  // beta-Lyapunov for the beta kind
  double cost = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  std::optional<double> gap;
  std::vector<double> x;
};

struct DiagnosticsConfig {
  long record_every = 100;
  bool compute_gap = false;      // duality gap on each record
  bool check_invariants = true;  // positivity and bounded cost (throws InvariantViolation)
  SolverOptions solver;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;  // includes the initial and the final state
  RunStatus status = RunStatus::MaxSteps;
  long steps = 0;
  double step_size = 0.0;
  std::vector<double> final_x;
  std::string failure;           // solver diagnostic when status == SolverFailure

  // Step-to-step Lyapunov monotonicity audit against the slack
  // 1e-10 |L| + h^2 ||x'||^2 max_e(c_e / x_e).
  long lyapunov_checks = 0;
  long lyapunov_violations = 0;
  double worst_lyapunov_excess = 0.0;  // max over steps of (increase - slack), <= 0 when clean

  // max over steps, edges and commodities of |Q_{e,i}| / bound_i (bound from
  // max_flow_bound); nullopt when no bound is available.
  std::optional<double> worst_flow_bound_ratio;
  // max over steps of c^T x(t) / (2 L(x(0))) for kinds with that guarantee.
  double worst_cost_ratio = 0.0;
};

// Euler integration solve -> rhs -> step until the fixed-point residual is
// at most spec.stop_tol or spec.max_steps. Solver failures end the run with
// status SolverFailure and the step index in `failure`.
Trajectory run(const Instance& instance, std::span<const double> x0, const DynamicsSpec& spec,
               const DiagnosticsConfig& diagnostics = {});

// CSV with header t,lyapunov,cost,energy,residual[,gap],<edge labels...>.
std::string trajectory_csv(const Instance& instance, const Trajectory& trajectory);

}  // namespace physnet
