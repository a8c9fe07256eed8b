#include "helpers.hpp"

#include "physnet/export.hpp"
#include "physnet/io.hpp"

#include <doctest.h>

#include <regex>

using namespace physnet;

TEST_CASE("graph scenario document") {
  const Json doc = Json::parse(R"({
    "nodes": ["a", "b", "c"],
    "edges": [{"u": "a", "v": "b", "cost": 1}, {"u": "b", "v": "c", "cost": 1}, {"u": "c", "v": "a", "cost": 1}],
    "demands": [{"source": "a", "sink": "b", "amount": 1}, {"source": "b", "sink": "c", "amount": 1},
                {"source": "a", "sink": "c", "amount": 1}],
    "initial_capacity": {"random_uniform": [0.001, 1], "seed": 4}
  })");
  const Scenario s = scenario_from_json(doc);
  CHECK(s.instance.num_nodes() == 3);
  CHECK(s.instance.num_commodities() == 3);
  CHECK(s.initial.kind == InitialCapacity::Kind::RandomUniform);
  CHECK(s.terminals.size() == 3);

  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(back.instance.costs() == s.instance.costs());
  CHECK(back.initial.sample(3) == s.initial.sample(3));
  CHECK(back.instance.demands().storage() == s.instance.demands().storage());
}

TEST_CASE("matrix scenario document") {
  const Json doc = Json::parse(R"({"A": [[2, 0], [0, 1]], "c": [1, 3], "B": [[1], [1]], "initial_capacity": [0.5, 2]})");
  const Scenario s = scenario_from_json(doc);
  CHECK_FALSE(s.instance.is_incidence());
  CHECK(s.initial.sample(2) == std::vector<double>{0.5, 2.0});
  const Scenario back = scenario_from_json(scenario_to_json(s));
  CHECK(back.instance.constraint_matrix().storage() == s.instance.constraint_matrix().storage());
}

TEST_CASE("scenario schema errors") {
  const char* bad[] = {
      R"([])",
      R"({"nodes": ["a"]})",
      R"({"nodes": ["a", "a"], "edges": [], "demands": []})",
      R"({"nodes": ["a", "b"], "edges": [{"u": "a", "v": "z", "cost": 1}], "demands": []})",
      R"({"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b", "cost": "x"}], "demands": []})",
      R"({"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b", "cost": -1}], "demands": []})",
      R"({"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b", "cost": 1}], "demands": [], "initial_capacity": 0})",
      R"({"nodes": ["a", "b"], "edges": [{"u": "a", "v": "b", "cost": 1}], "demands": [], "initial_capacity": [1, 2]})",
      R"({"A": [[1, 0], [1]], "c": [1, 1], "B": [[1], [1]]})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS((void)scenario_from_json(Json::parse(text)), ScenarioError);
  }
  const Json split = Json::parse(R"({"nodes": ["a", "b", "c", "d"],
    "edges": [{"u": "a", "v": "b", "cost": 1}, {"u": "c", "v": "d", "cost": 1}],
    "demands": [{"source": "a", "sink": "d", "amount": 1}]})");
  CHECK_THROWS_AS((void)scenario_from_json(split), InfeasibleDemand);
  CHECK_THROWS_AS((void)load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST_CASE("final state round trip") {
  Trajectory t;
  t.final_x = {0.25, 1.5};
  t.status = RunStatus::Converged;
  t.steps = 42;
  const FinalState st = final_state_from_json(final_state_json(t));
  CHECK(st.x == t.final_x);
  CHECK(st.status == "converged");
  CHECK(st.steps == 42);
}

TEST_CASE("report keeps lyapunov = (cost + energy) / 2") {
  const Scenario s = ring_scenario(3);
  DynamicsSpec spec;
  spec.step_size = 0.05;
  const Trajectory t = run(s.instance, s.initial.sample(3), spec);
  const FlowSolution f = solve_commodities(s.instance, t.final_x, GroundingPlan::for_instance(s.instance));
  const Json r = run_report(s, spec, t, f);
  const double c = r["cost"], e = r["energy"], l = r["lyapunov"];
  CHECK(std::abs(l - 0.5 * (c + e)) <= 1e-12);
  CHECK(r["certificate"]["gap"].get<double>() <= 1e-3);
  CHECK(r["status"] == "converged");
}

TEST_CASE("dot export") {
  const Instance inst = testutil::ring();
  const std::vector<double> x = {0.8165, 0.8164, 0.8166};
  const std::string dot = to_dot(inst, x);
  const std::regex edge_re(R"re("(\w+)" -- "(\w+)" \[penwidth=([0-9.]+), label="([0-9.]+)"\])re");
  int edges = 0;
  for (auto it = std::sregex_iterator(dot.begin(), dot.end(), edge_re); it != std::sregex_iterator(); ++it) {
    ++edges;
    CHECK(std::stod((*it)[3]) == doctest::Approx(8.0).epsilon(1e-3));
    CHECK((*it)[4].str().size() == 5);  // three decimals
  }
  CHECK(edges == 3);
  CHECK(dot == to_dot(inst, x));
}

TEST_CASE("svg export") {
  const Scenario s = bowtie_scenario(8.0);
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7};
  DrawingOptions opt;
  opt.positions = s.positions;
  opt.terminals = s.terminals;
  const std::string svg = to_svg(s.instance, x, opt);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("stroke-width=\"8.000\"") != std::string::npos);
  CHECK(svg.find("stroke-width=\"1.143\"") != std::string::npos);
  std::size_t terms = 0;
  for (std::size_t p = svg.find("#d62728"); p != std::string::npos; p = svg.find("#d62728", p + 1)) ++terms;
  CHECK(terms == 4);
  opt.edge_mask = std::vector<bool>{true, false, false, false, false, false, true};
  const std::string masked = to_svg(s.instance, x, opt);
  std::size_t lines = 0;
  for (std::size_t p = masked.find("<line"); p != std::string::npos; p = masked.find("<line", p + 1)) ++lines;
  CHECK(lines == 2);
  CHECK(svg == to_svg(s.instance, x, DrawingOptions{s.positions, s.terminals, {}, 8.0, 0.0}));
}
