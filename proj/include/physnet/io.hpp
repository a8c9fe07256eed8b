#pragma once
// Scenario documents and run artifacts (final_state.json, report.json).
//
// Graph scenario:
//   {"nodes": [ids], "edges": [{"u": id, "v": id, "cost": c, "label"?: s}],
//    "demands": [{"source": id, "sink": id, "amount": a}],
//    "initial_capacity": number | [per edge] | {"random_uniform": [lo, hi], "seed": s},
//    "positions"?: [[x, y] per node], "terminals"?: [ids], "hub"?: id, "name"?: s}
// Matrix scenario:
//   {"A": [[row] per constraint], "c": [...], "B": [[row] per constraint], "initial_capacity": ...}

#include "physnet/analysis.hpp"
#include "physnet/dynamics.hpp"
#include "physnet/scenarios.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace physnet {

using Json = nlohmann::json;

// Throws ScenarioError (or InfeasibleDemand) on schema or validation errors.
Scenario scenario_from_json(const Json& doc);
Scenario load_scenario(const std::string& path);
Instance load_instance(const Json& doc);

// Graph-variant document for a graph scenario, matrix variant otherwise.
Json scenario_to_json(const Scenario& scenario);

struct FinalState {
  std::vector<double> x;
  std::string status;
  long steps = 0;
};

Json final_state_json(const Trajectory& trajectory);
FinalState final_state_from_json(const Json& doc);
FinalState load_final_state(const std::string& path);

Json certificate_json(const Certificate& cert);
Json bregman_json(const BregmanReport& report);

// cost, energy, lyapunov (= (cost + energy) / 2), certificate, residual,
// status and diagnostics for the final state of a run.
Json run_report(const Scenario& scenario, const DynamicsSpec& spec, const Trajectory& trajectory,
                const FlowSolution& final_flow, const std::optional<BregmanReport>& bregman = std::nullopt);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace physnet
