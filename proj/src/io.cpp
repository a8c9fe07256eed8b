#include "physnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace physnet {

namespace {

const Json& field(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ScenarioError(what + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const Json& v, const std::string& what) {
  if (!v.is_array()) throw ScenarioError(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(number(item, what));
  return out;
}

DenseMatrix matrix(const Json& v, const std::string& what) {
  if (!v.is_array()) throw ScenarioError(what + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& row : v) rows.push_back(numbers(row, what));
  return DenseMatrix::from_rows(rows);
}

std::string node_key(const Json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ScenarioError(what + " must be a node id");
}

InitialCapacity initial_capacity(const Json& doc) {
  const auto it = doc.find("initial_capacity");
  if (it == doc.end()) return InitialCapacity::uniform(1.0);
  const Json& v = *it;
  if (v.is_number()) return InitialCapacity::uniform(v.get<double>());
  if (v.is_array()) return InitialCapacity::per_edge(numbers(v, "initial_capacity"));
  if (v.is_object()) {
    const auto range = numbers(field(v, "random_uniform"), "random_uniform");
    if (range.size() != 2) throw ScenarioError("random_uniform must be [lo, hi]");
    const Json& seed = field(v, "seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0) throw ScenarioError("seed must be a nonnegative integer");
    return InitialCapacity::random_uniform(range[0], range[1], seed.get<std::uint64_t>());
  }
  throw ScenarioError("initial_capacity must be a number, an array or a random_uniform object");
}

struct GraphDoc {
  std::vector<std::string> nodes;
  std::map<std::string, int> index;
  std::vector<GraphEdge> edges;
  std::vector<DemandSpec> demands;
};

GraphDoc parse_graph(const Json& doc) {
  GraphDoc g;
  const Json& nodes = field(doc, "nodes");
  if (!nodes.is_array() || nodes.empty()) throw ScenarioError("nodes must be a nonempty array");
  for (const auto& n : nodes) {
    const std::string id = node_key(n, "nodes entry");
    if (!g.index.emplace(id, static_cast<int>(g.nodes.size())).second) throw ScenarioError("duplicate node id '" + id + "'");
    g.nodes.push_back(id);
  }
  auto lookup = [&](const Json& v, const std::string& what) {
    const std::string id = node_key(v, what);
    const auto it = g.index.find(id);
    if (it == g.index.end()) throw ScenarioError(what + " references unknown node '" + id + "'");
    return it->second;
  };
  const Json& edges = field(doc, "edges");
  if (!edges.is_array()) throw ScenarioError("edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_object()) throw ScenarioError("edge entries must be objects");
    GraphEdge ge;
    ge.u = lookup(field(e, "u"), "edge endpoint");
    ge.v = lookup(field(e, "v"), "edge endpoint");
    ge.cost = number(field(e, "cost"), "edge cost");
    if (const auto it = e.find("label"); it != e.end()) {
      if (!it->is_string()) throw ScenarioError("edge label must be a string");
      ge.label = it->get<std::string>();
    }
    g.edges.push_back(ge);
  }
  const Json& demands = field(doc, "demands");
  if (!demands.is_array()) throw ScenarioError("demands must be an array");
  for (const auto& d : demands) {
    if (!d.is_object()) throw ScenarioError("demand entries must be objects");
    DemandSpec ds;
    ds.source = lookup(field(d, "source"), "demand source");
    ds.sink = lookup(field(d, "sink"), "demand sink");
    ds.amount = d.contains("amount") ? number(d["amount"], "demand amount") : 1.0;
    g.demands.push_back(ds);
  }
  return g;
}

bool is_graph_doc(const Json& doc) {
  if (!doc.is_object()) throw ScenarioError("scenario document must be a JSON object");
  if (doc.contains("nodes")) return true;
  if (doc.contains("A")) return false;
  throw ScenarioError("scenario document has neither 'nodes' nor 'A'");
}

}  // namespace

Instance load_instance(const Json& doc) {
  if (is_graph_doc(doc)) {
    GraphDoc g = parse_graph(doc);
    return Instance::from_graph(std::move(g.nodes), g.edges, g.demands);
  }
  return Instance::from_matrix(matrix(field(doc, "A"), "A"), numbers(field(doc, "c"), "c"), matrix(field(doc, "B"), "B"));
}

Scenario scenario_from_json(const Json& doc) {
  try {
    if (!is_graph_doc(doc)) {
      Scenario s{doc.value("name", std::string("matrix")), load_instance(doc), initial_capacity(doc), {}, {}, {}, {}};
      s.initial.validate(s.instance.num_edges());
      return s;
    }
    GraphDoc g = parse_graph(doc);
    auto lookup = [&](const Json& v) {
      const std::string id = node_key(v, "terminal");
      const auto it = g.index.find(id);
      if (it == g.index.end()) throw ScenarioError("unknown node '" + id + "'");
      return it->second;
    };
    std::vector<Point> positions;
    if (const auto it = doc.find("positions"); it != doc.end()) {
      if (!it->is_array() || it->size() != g.nodes.size()) throw ScenarioError("positions must list one [x, y] per node");
      for (const auto& p : *it) {
        const auto xy = numbers(p, "position");
        if (xy.size() != 2) throw ScenarioError("position must be [x, y]");
        positions.push_back({xy[0], xy[1]});
      }
    }
    std::vector<int> terminals;
    if (const auto it = doc.find("terminals"); it != doc.end()) {
      if (!it->is_array()) throw ScenarioError("terminals must be an array");
      for (const auto& t : *it) terminals.push_back(lookup(t));
    } else {
      for (const auto& d : g.demands) {
        for (int v : {d.source, d.sink}) {
          if (std::find(terminals.begin(), terminals.end(), v) == terminals.end()) terminals.push_back(v);
        }
      }
    }
    std::optional<int> hub;
    if (const auto it = doc.find("hub"); it != doc.end() && !it->is_null()) hub = lookup(*it);
    Instance inst = Instance::from_graph(g.nodes, g.edges, g.demands);
    Scenario s{doc.value("name", std::string("graph")), std::move(inst), initial_capacity(doc), g.demands,
               std::move(positions), std::move(terminals), hub};
    s.initial.validate(s.instance.num_edges());
    return s;
  } catch (const Json::exception& err) {
    throw ScenarioError(std::string("malformed scenario: ") + err.what());
  }
}

Scenario load_scenario(const std::string& path) {
  const std::string text = read_text_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& err) {
    throw ScenarioError("cannot parse " + path + ": " + err.what());
  }
  return scenario_from_json(doc);
}

Json scenario_to_json(const Scenario& s) {
  const Instance& inst = s.instance;
  Json doc;
  doc["name"] = s.name;
  if (inst.edge_meta()) {
    doc["nodes"] = inst.node_ids();
    Json edges = Json::array();
    const auto& meta = *inst.edge_meta();
    for (std::size_t e = 0; e < inst.num_edges(); ++e) {
      edges.push_back({{"u", inst.node_ids()[meta[e].tail]},
                       {"v", inst.node_ids()[meta[e].head]},
                       {"cost", inst.costs()[e]},
                       {"label", meta[e].label}});
    }
    doc["edges"] = edges;
    Json demands = Json::array();
    for (const auto& d : s.demands) {
      demands.push_back({{"source", inst.node_ids()[d.source]}, {"sink", inst.node_ids()[d.sink]}, {"amount", d.amount}});
    }
    doc["demands"] = demands;
    if (!s.positions.empty()) {
      Json pos = Json::array();
      for (const auto& p : s.positions) pos.push_back({p.x, p.y});
      doc["positions"] = pos;
    }
    if (!s.terminals.empty()) {
      Json terms = Json::array();
      for (int t : s.terminals) terms.push_back(inst.node_ids()[t]);
      doc["terminals"] = terms;
    }
    if (s.hub) doc["hub"] = inst.node_ids()[*s.hub];
  } else {
    const DenseMatrix a = inst.constraint_matrix();
    Json rows = Json::array();
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const auto row = a.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["A"] = rows;
    doc["c"] = inst.costs();
    Json brows = Json::array();
    for (std::size_t r = 0; r < inst.demands().rows(); ++r) {
      const auto row = inst.demands().row(r);
      brows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["B"] = brows;
  }
  switch (s.initial.kind) {
    case InitialCapacity::Kind::Uniform: doc["initial_capacity"] = s.initial.value; break;
    case InitialCapacity::Kind::PerEdge: doc["initial_capacity"] = s.initial.values; break;
    case InitialCapacity::Kind::RandomUniform:
      doc["initial_capacity"] = {{"random_uniform", {s.initial.lo, s.initial.hi}}, {"seed", s.initial.seed}};
      break;
  }
  return doc;
}

Json final_state_json(const Trajectory& trajectory) {
  return {{"x", trajectory.final_x}, {"status", std::string(run_status_name(trajectory.status))},
          {"steps", trajectory.steps}};
}

FinalState final_state_from_json(const Json& doc) {
  try {
    FinalState st;
    st.x = numbers(field(doc, "x"), "x");
    st.status = doc.value("status", std::string());
    st.steps = doc.value("steps", 0L);
    return st;
  } catch (const Json::exception& err) {
    throw ScenarioError(std::string("malformed final state: ") + err.what());
  }
}

FinalState load_final_state(const std::string& path) {
  try {
    return final_state_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::parse_error& err) {
    throw ScenarioError("cannot parse " + path + ": " + err.what());
  }
}

Json certificate_json(const Certificate& c) {
  return {{"primal", c.primal},     {"dual", c.dual}, {"gamma", c.gamma},
          {"lyapunov", c.lyapunov}, {"gap", c.gap},   {"relative_gap", c.relative_gap()}};
}

Json bregman_json(const BregmanReport& r) {
  return {{"divergence", r.divergence},
          {"lyapunov_star", r.lyapunov_star},
          {"max_scaled_gap", r.max_scaled_gap},
          {"max_ratio", r.max_ratio},
          {"slack", r.slack},
          {"pass", r.pass},
          {"excluded_zero_coordinates", r.excluded_zero_coordinates}};
}

Json run_report(const Scenario& scenario, const DynamicsSpec& spec, const Trajectory& trajectory,
                const FlowSolution& final_flow, const std::optional<BregmanReport>& bregman) {
  const Instance& inst = scenario.instance;
  const auto& x = trajectory.final_x;
  const double cost = network_cost(inst, x);
  const double energy = final_flow.total_energy();
  Json rep;
  rep["scenario"] = scenario.name;
  rep["dynamics"] = std::string(dynamics_kind_name(spec.kind));
  if (spec.g) rep["g"] = spec.g->to_string();
  if (spec.beta) rep["beta"] = *spec.beta;
  rep["h"] = spec.step_size;
  rep["status"] = std::string(run_status_name(trajectory.status));
  rep["steps"] = trajectory.steps;
  rep["cost"] = cost;
  rep["energy"] = energy;
  rep["lyapunov"] = 0.5 * (cost + energy);
  if (spec.beta) rep["beta_lyapunov"] = beta_lyapunov(inst, x, final_flow, *spec.beta).value;
  rep["residual"] = fixed_point_residual(inst, x, final_flow, spec);
  rep["certificate"] = certificate_json(certificate(inst, x, final_flow));
  rep["lyapunov_audit"] = {{"checks", trajectory.lyapunov_checks},
                           {"violations", trajectory.lyapunov_violations},
                           {"worst_excess", trajectory.worst_lyapunov_excess}};
  if (trajectory.worst_flow_bound_ratio) rep["worst_flow_bound_ratio"] = *trajectory.worst_flow_bound_ratio;
  rep["worst_cost_ratio"] = trajectory.worst_cost_ratio;
  if (!trajectory.failure.empty()) rep["failure"] = trajectory.failure;
  if (bregman) rep["bregman"] = bregman_json(*bregman);
  return rep;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << contents;
  if (!out) throw Error("short write to " + path);
}

}  // namespace physnet
