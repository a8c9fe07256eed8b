// physnet: run, sweep, certify and export capacity dynamics on network
// design instances.

#include "physnet/analysis.hpp"
#include "physnet/dynamics.hpp"
#include "physnet/export.hpp"
#include "physnet/io.hpp"
#include "physnet/scenarios.hpp"
#include "physnet/simd.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace physnet;

namespace {

// Configuration problems map to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  std::string scenario;
  std::string dynamics = "two-norm";
  std::string g;
  std::optional<double> beta;
  double h = 0.01;
  long max_steps = 200000;
  double stop_tol = 1e-7;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  long record_every = 100;
  std::string solver = "auto";
  double solver_tol = 1e-10;
  bool dot = false;
  bool svg = false;
  bool bregman = false;
  double prune_threshold = 1e-3;
};

void add_run_flags(CLI::App* cmd, RunOptions& o, bool scenario_required = true) {
  auto* sc = cmd->add_option("--scenario", o.scenario,
                             "scenario JSON path, or builtin:ring | builtin:bowtie[:L] | builtin:grid");
  if (scenario_required) sc->required();
  cmd->add_option("--dynamics", o.dynamics, "one-norm | two-norm | generalized | beta | mirror")->capture_default_str();
  cmd->add_option("--g", o.g, "g for generalized dynamics: identity | reactive:D | reactive-squared:D | power:MU | "
                              "saturating:ALPHA,MU");
  cmd->add_option("--beta", o.beta, "beta in (0, 2) for beta dynamics");
  cmd->add_option("--h", o.h, "Euler step size")->capture_default_str();
  cmd->add_option("--max-steps", o.max_steps, "step limit")->capture_default_str();
  cmd->add_option("--stop-tol", o.stop_tol, "fixed-point residual threshold")->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed for random initial capacities (overrides the scenario seed)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--record-every", o.record_every, "trajectory sampling interval in steps")->capture_default_str();
  cmd->add_option("--solver", o.solver, "auto | cg | cholesky | dense")->capture_default_str();
  cmd->add_option("--solver-tol", o.solver_tol, "relative residual per linear solve")->capture_default_str();
}

Scenario builtin_scenario(const std::string& spec, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw ConfigError("empty builtin scenario name");
  if (parts[0] == "ring") return ring_scenario(seed);
  if (parts[0] == "bowtie") {
    double l = std::numeric_limits<double>::infinity();
    if (parts.size() > 1 && parts[1] != "inf") {
      try {
        l = std::stod(parts[1]);
      } catch (const std::exception&) {
        throw ConfigError("bad bow-tie middle cost '" + parts[1] + "'");
      }
    }
    return bowtie_scenario(l, seed);
  }
  if (parts[0] == "grid") {
    const RegionGrid grid = build_region_grid(synthetic_region_polygon(), 1.0, seed);
    return grid_region_scenario(grid, pick_terminals(grid, 20, 0.5, seed));
  }
  throw ConfigError("unknown builtin scenario '" + parts[0] + "'");
}

Scenario resolve_scenario(const std::string& source, std::optional<std::uint64_t> seed) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return builtin_scenario(source.substr(prefix.size()), seed.value_or(1));
  return load_scenario(source);
}

SolverOptions solver_options(const RunOptions& o, const Instance& inst) {
  SolverOptions s;
  s.tol = o.solver_tol;
  if (o.solver == "auto") {
    // Many commodities share one factorization; CG pays per commodity.
    s.kind = inst.num_commodities() > 4 && inst.num_nodes() > 50 ? SolverKind::Cholesky : SolverKind::Cg;
  } else {
    try {
      s.kind = parse_solver_kind(o.solver);
    } catch (const Error& err) {
      throw ConfigError(err.what());
    }
  }
  return s;
}

DynamicsSpec dynamics_spec(const RunOptions& o) {
  DynamicsSpec spec;
  try {
    spec.kind = parse_dynamics_kind(o.dynamics);
    if (!o.g.empty()) spec.g = GFunction::parse(o.g);
    if (spec.kind == DynamicsKind::Generalized && !spec.g) spec.g = GFunction::identity();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  spec.beta = o.beta;
  spec.step_size = o.h;
  spec.max_steps = o.max_steps;
  spec.stop_tol = o.stop_tol;
  try {
    spec.validate();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  return spec;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
}

DrawingOptions drawing_for(const Scenario& s) {
  DrawingOptions d;
  d.positions = s.positions;
  d.terminals = s.terminals;
  return d;
}

struct Outcome {
  Trajectory traj;
  std::optional<FlowSolution> flow;
};

Outcome simulate(const Scenario& s, const DynamicsSpec& spec, const RunOptions& o, bool compute_gap = false) {
  DiagnosticsConfig diag;
  diag.record_every = o.record_every;
  diag.compute_gap = compute_gap;
  diag.solver = solver_options(o, s.instance);
  const auto x0 = s.initial.sample(s.instance.num_edges(), o.seed);
  Outcome out{run(s.instance, x0, spec, diag), std::nullopt};
  if (out.traj.status != RunStatus::SolverFailure) {
    out.flow = solve_commodities(s.instance, out.traj.final_x, GroundingPlan::for_instance(s.instance), diag.solver);
  }
  return out;
}

// Reference minimizer for the mirror-descent bound: a long fine-step run.
std::vector<double> reference_minimizer(const Scenario& s, const RunOptions& o) {
  DynamicsSpec ref;
  ref.kind = DynamicsKind::Mirror;
  ref.step_size = 0.001;
  ref.stop_tol = 1e-10;
  ref.max_steps = 5000000;
  DiagnosticsConfig diag;
  diag.record_every = ref.max_steps;
  diag.solver = solver_options(o, s.instance);
  const auto x0 = s.initial.sample(s.instance.num_edges(), o.seed);
  return run(s.instance, x0, ref, diag).final_x;
}

int cmd_run(const RunOptions& o) {
  const Scenario s = resolve_scenario(o.scenario, o.seed);
  const DynamicsSpec spec = dynamics_spec(o);
  ensure_dir(o.out);
  Outcome res = simulate(s, spec, o);
  const fs::path dir(o.out);
  write_text_file((dir / "trajectory.csv").string(), trajectory_csv(s.instance, res.traj));
  write_text_file((dir / "final_state.json").string(), final_state_json(res.traj).dump(2) + "\n");
  if (!res.flow) {
    throw SolverFailure(0, 0.0, res.traj.failure);
  }
  std::optional<BregmanReport> breg;
  if (o.bregman) {
    if (spec.kind != DynamicsKind::Mirror) throw ConfigError("--bregman requires --dynamics mirror");
    const auto xs = reference_minimizer(s, o);
    breg = bregman_bound_check(s.instance, res.traj, xs, 0.2, 1e-8, solver_options(o, s.instance));
  }
  const Json report = run_report(s, spec, res.traj, *res.flow, breg);
  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  const DrawingOptions draw = drawing_for(s);
  if (o.dot) write_text_file((dir / "network.dot").string(), to_dot(s.instance, res.traj.final_x, draw));
  if (o.svg) write_text_file((dir / "network.svg").string(), to_svg(s.instance, res.traj.final_x, draw));
  std::cout << Json{{"status", report["status"]},  {"steps", report["steps"]},
                    {"cost", report["cost"]},      {"energy", report["energy"]},
                    {"lyapunov", report["lyapunov"]}, {"gap", report["certificate"]["gap"]}}
                   .dump()
            << "\n";
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("sweep needs at least one value");
  return out;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return "inf";
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_sweep(RunOptions o, const std::string& values_text) {
  const auto values = parse_values(values_text);
  const DynamicsSpec spec = dynamics_spec(o);
  ensure_dir(o.out);
  std::string csv = "L,q_b,q_m,q_t,x_m,cost,energy,gap\n";
  int failures = 0;
  for (double l : values) {
    std::vector<double> row(7, std::numeric_limits<double>::quiet_NaN());
    try {
      const Scenario s = bowtie_scenario(l, o.seed.value_or(1));
      Outcome res = simulate(s, spec, o);
      if (!res.flow) throw Error(res.traj.failure);
      const BowtieEdges be = bowtie_edges(s.instance);
      const auto& q = res.flow->flows;
      const auto& x = res.traj.final_x;
      row[0] = q(be.bottom, 0);
      row[1] = be.middle ? q(*be.middle, 0) : 0.0;
      row[2] = q(be.top, 0);
      row[3] = be.middle ? x[*be.middle] : 0.0;
      row[4] = network_cost(s.instance, x);
      row[5] = res.flow->total_energy();
      row[6] = certificate(s.instance, x, *res.flow).gap;
      if (res.traj.status != RunStatus::Converged) {
        std::cerr << Json{{"warning", "not converged"}, {"L", csv_number(l)}, {"steps", res.traj.steps}}.dump()
                  << "\n";
      }
    } catch (const Error& err) {
      ++failures;
      std::cerr << Json{{"error", "sweep value failed"}, {"L", csv_number(l)}, {"message", err.what()}}.dump() << "\n";
    }
    csv += csv_number(l);
    for (double v : row) csv += "," + csv_number(v);
    csv += "\n";
  }
  write_text_file((fs::path(o.out) / "sweep_summary.csv").string(), csv);
  return failures == 0 ? 0 : 1;
}

int cmd_certify(const RunOptions& o, const std::string& state_path, double gap_tol) {
  const Scenario s = resolve_scenario(o.scenario, o.seed);
  std::vector<double> x;
  const SolverOptions solver = solver_options(o, s.instance);
  if (!state_path.empty()) {
    x = load_final_state(state_path).x;
    if (x.size() != s.instance.num_edges()) throw ConfigError("state does not match the scenario's edge count");
  } else {
    DiagnosticsConfig diag;
    diag.record_every = std::max<long>(1, o.max_steps);
    diag.solver = solver;
    const auto traj = run(s.instance, s.initial.sample(s.instance.num_edges(), o.seed), dynamics_spec(o), diag);
    if (traj.status == RunStatus::SolverFailure) throw SolverFailure(0, 0.0, traj.failure);
    x = traj.final_x;
  }
  const FlowSolution flow = solve_commodities(s.instance, x, GroundingPlan::for_instance(s.instance), solver);
  const Certificate cert = certificate(s.instance, x, flow);
  Json out = certificate_json(cert);
  out["gap_tol"] = gap_tol;
  out["pass"] = cert.gap <= gap_tol;
  std::cout << out.dump(2) << "\n";
  return cert.gap <= gap_tol ? 0 : 1;
}

int cmd_export(const std::string& scenario, const std::string& state_path, const std::string& format,
               const std::string& out_path, std::optional<double> prune, std::optional<std::uint64_t> seed) {
  if (format != "dot" && format != "svg") throw ConfigError("unknown export format '" + format + "'");
  const Scenario s = resolve_scenario(scenario, seed);
  const FinalState st = load_final_state(state_path);
  if (st.x.size() != s.instance.num_edges()) throw ConfigError("state does not match the scenario's edge count");
  DrawingOptions draw = drawing_for(s);
  if (prune) draw.edge_mask = prune_degree_one(s.instance, st.x, s.terminals, *prune).edge_kept;
  const std::string text = format == "dot" ? to_dot(s.instance, st.x, draw) : to_svg(s.instance, st.x, draw);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

struct GenOptions {
  std::string kind = "ring";
  double middle = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  std::string polygon;
  double spacing = 1.0;
  std::size_t terminals = 20;
  double threshold_fraction = 0.5;
  int rows = 10;
  int cols = 10;
  std::string out;
};

std::vector<Point> load_polygon(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& err) {
    throw ConfigError("cannot parse polygon " + path + ": " + err.what());
  }
  if (!doc.is_array()) throw ConfigError("polygon must be a JSON list of [x, y] pairs");
  std::vector<Point> poly;
  for (const auto& p : doc) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError("polygon must be a JSON list of [x, y] pairs");
    }
    poly.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return poly;
}

int cmd_gen(const GenOptions& g) {
  std::optional<Scenario> s;
  if (g.kind == "ring") {
    s.emplace(ring_scenario(g.seed));
  } else if (g.kind == "bowtie") {
    s.emplace(bowtie_scenario(g.middle, g.seed));
  } else if (g.kind == "grid") {
    const auto poly = g.polygon.empty() ? synthetic_region_polygon() : load_polygon(g.polygon);
    const RegionGrid grid = build_region_grid(poly, g.spacing, g.seed);
    s.emplace(grid_region_scenario(grid, pick_terminals(grid, g.terminals, g.threshold_fraction, g.seed)));
  } else if (g.kind == "lattice") {
    const int n = g.rows * g.cols;
    if (n < 2) throw ConfigError("lattice needs at least two nodes");
    std::vector<DemandSpec> demands;
    std::mt19937_64 rng(g.seed);
    const std::size_t count = std::max<std::size_t>(1, g.terminals);
    while (demands.size() < count) {
      const int a = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      const int b = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      if (a != b) demands.push_back({a, b, 1.0});
    }
    s.emplace(lattice_scenario(g.rows, g.cols, demands));
  } else {
    throw ConfigError("unknown scenario kind '" + g.kind + "'");
  }
  const std::string text = scenario_to_json(*s).dump(2) + "\n";
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
  return 0;
}

void print_error(const char* type, const std::string& message) {
  std::cerr << Json{{"error", type}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physarum-style capacity dynamics for multi-commodity network design"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  bool show_isa = false;
  app.add_flag("--simd-info", show_isa, "print the selected SIMD kernel set to stderr");

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "integrate a dynamics and write trajectory, state and report");
  add_run_flags(run_cmd, run_opt);
  run_cmd->add_flag("--dot", run_opt.dot, "also write network.dot");
  run_cmd->add_flag("--svg", run_opt.svg, "also write network.svg");
  run_cmd->add_flag("--bregman", run_opt.bregman, "check the mirror-descent rate bound (mirror dynamics)");

  RunOptions sweep_opt;
  sweep_opt.scenario = "builtin:bowtie";
  std::string sweep_values = "8,8.5,9,9.5,10,10.3";
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep the bow-tie middle-edge cost L");
  add_run_flags(sweep_cmd, sweep_opt, false);
  sweep_cmd->add_option("--values", sweep_values, "comma-separated L values ('inf' omits the middle edge)")
      ->capture_default_str();

  RunOptions cert_opt;
  std::string cert_state;
  double gap_tol = 1e-3;
  auto* cert_cmd = app.add_subcommand("certify", "duality certificate for a state (runs the dynamics if no state)");
  add_run_flags(cert_cmd, cert_opt);
  cert_cmd->add_option("--state", cert_state, "final_state.json to certify");
  cert_cmd->add_option("--gap-tol", gap_tol, "exit 0 iff gap <= this")->capture_default_str();

  std::string exp_scenario, exp_state, exp_format = "svg", exp_out;
  std::optional<double> exp_prune;
  std::optional<std::uint64_t> exp_seed;
  auto* exp_cmd = app.add_subcommand("export", "render a final state as DOT or SVG");
  exp_cmd->add_option("--scenario", exp_scenario, "scenario JSON path or builtin:NAME")->required();
  exp_cmd->add_option("--state", exp_state, "final_state.json")->required();
  exp_cmd->add_option("--format", exp_format, "dot | svg")->capture_default_str();
  exp_cmd->add_option("--out", exp_out, "output file (stdout when omitted)");
  exp_cmd->add_option("--prune", exp_prune, "draw only the degree-one pruned network at this capacity threshold");
  exp_cmd->add_option("--seed", exp_seed, "seed for builtin scenarios");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-scenario", "write a generated scenario as JSON");
  gen_cmd->add_option("--kind", gen.kind, "ring | bowtie | grid | lattice")->capture_default_str();
  gen_cmd->add_option("--L", gen.middle, "bow-tie middle edge cost (omit for no middle edge)");
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--polygon", gen.polygon, "grid region as a JSON list of [x, y] (default: synthetic region)");
  gen_cmd->add_option("--spacing", gen.spacing, "grid spacing")->capture_default_str();
  gen_cmd->add_option("--terminals", gen.terminals, "grid terminals, or lattice demand count")->capture_default_str();
  gen_cmd->add_option("--threshold-fraction", gen.threshold_fraction,
                      "demand distance cutoff as a fraction of the terminal diameter")
      ->capture_default_str();
  gen_cmd->add_option("--rows", gen.rows, "lattice rows")->capture_default_str();
  gen_cmd->add_option("--cols", gen.cols, "lattice columns")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("config", e.what());
    return 2;
  }
  if (show_isa) std::cerr << "simd: " << simd::isa_name(simd::kernels().isa) << "\n";

  try {
    if (*run_cmd) return cmd_run(run_opt);
    if (*sweep_cmd) return cmd_sweep(sweep_opt, sweep_values);
    if (*cert_cmd) return cmd_certify(cert_opt, cert_state, gap_tol);
    if (*exp_cmd) return cmd_export(exp_scenario, exp_state, exp_format, exp_out, exp_prune, exp_seed);
    if (*gen_cmd) return cmd_gen(gen);
  } catch (const SolverFailure& err) {
    print_error("solver_failure", err.what());
    return 1;
  } catch (const InvariantViolation& err) {
    print_error("invariant_violation", err.what());
    return 1;
  } catch (const PruneError& err) {
    print_error("prune", err.what());
    return 1;
  } catch (const Error& err) {
    print_error("config", err.what());
    return 2;
  } catch (const std::exception& err) {
    print_error("internal", err.what());
    return 1;
  }
  return 2;
}
