#pragma once
// Lyapunov functions, duality certificates, the mirror-descent rate check
// and brute-force oracles for small instances.

#include "physnet/dynamics.hpp"
#include "physnet/electrical.hpp"
#include "physnet/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace physnet {

struct LyapunovReport {
  double value = 0.0;  // (cost + energy) / 2
  double cost = 0.0;
  double energy = 0.0;
  std::vector<double> gradient;  // (c_e / 2)(1 - ||Lambda_e||_2^2)
};

LyapunovReport lyapunov(const Instance& instance, std::span<const double> x, const FlowSolution& flow);

struct BetaLyapunovReport {
  double value = 0.0;  // (c^T x^{2-beta} / (2 - beta) + energy) / 2
  std::vector<double> gradient;  // (c_e / 2)(x_e^{1-beta} - ||Lambda_e||_2^2)
};

BetaLyapunovReport beta_lyapunov(const Instance& instance, std::span<const double> x, const FlowSolution& flow,
                                 double beta);

// Lyapunov value at x from a fresh solve. With `beta` set, the beta variant.
double lyapunov_value(const Instance& instance, std::span<const double> x, const SolverOptions& solver = {},
                      std::optional<double> beta = std::nullopt);

// Central differences of the Lyapunov value along each coordinate, step eps.
// Requires x_e > eps. Uses a dense solve so differences are not swamped by
// iterative-solver noise.
std::vector<double> finite_difference_gradient(const Instance& instance, std::span<const double> x, double eps,
                                               std::optional<double> beta = std::nullopt);

struct Certificate {
  double primal = 0.0;     // sum_e c_e ||Q_e||_2, feasible since A Q = B
  double dual = 0.0;       // Tr(B^T (gamma P)), feasible for the potential program
  double gamma = 0.0;      // min_e c_e / ||A_e^T P||_2
  double lyapunov = 0.0;   // L(x)
  double gap = 0.0;        // primal - dual
  double relative_gap() const { return primal != 0.0 ? gap / primal : gap; }
};

// Throws Error when every potential drop is zero while B is nonzero.
Certificate certificate(const Instance& instance, std::span<const double> x, const FlowSolution& flow);

struct BruteForceConfig {
  double lo = 1e-3;          // search box per coordinate (lower end clamped to floor)
  double hi = 10.0;
  int grid_points = 25;      // log-spaced grid per coordinate
  double tol = 1e-10;        // golden-section bracket width
  int sweeps = 200;          // coordinate sweeps of golden-section refinement
  double floor = 1e-12;
  // One-dimensional family x(z) = z * direction (zero entries pinned to
  // floor). When set, the instance dimension limit does not apply.
  std::optional<std::vector<double>> direction;
};

struct BruteForceResult {
  double value = 0.0;
  std::vector<double> argmin;
};

// Grid search plus golden-section refinement of min_{x >= floor} L(x).
// Throws Error when m > 4 and no direction is given.
BruteForceResult brute_force_min_lyapunov(const Instance& instance, const BruteForceConfig& config = {});

// Relative entropy D_h(x, y) = sum x ln(x/y) - sum x + sum y with 0 ln 0 = 0.
double bregman_divergence(std::span<const double> x, std::span<const double> y);

struct BregmanReport {
  double divergence = 0.0;   // D_h(x*, x(0))
  double lyapunov_star = 0.0;  // L(x*)
  double max_scaled_gap = 0.0;  // max over records with t >= 1 of t (L(x(t)) - L(x*))
  double max_ratio = 0.0;       // max_scaled_gap / divergence (0 when both vanish)
  double slack = 0.2;
  bool pass = false;
  bool excluded_zero_coordinates = false;  // x* had coordinates treated as zero
  std::vector<std::pair<double, double>> series;  // (t, t (L(x(t)) - L(x*)))
};

// Checks L(x(t)) <= L(x*) + D_h(x*, x(0)) / t on the recorded states of a
// mirror-kind trajectory, with multiplicative slack (1 + slack).
// Coordinates of x* at or below `zero_threshold` count as zero.
BregmanReport bregman_bound_check(const Instance& instance, const Trajectory& trajectory,
                                  std::span<const double> x_star, double slack = 0.2,
                                  double zero_threshold = 1e-8, const SolverOptions& solver = {});

}  // namespace physnet
