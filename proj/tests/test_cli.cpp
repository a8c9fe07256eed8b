// Drives the physnet binary end to end.

#include "physnet/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using physnet::Json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string cli() {
  const char* p = std::getenv("PHYSNET_CLI_PATH");
  return p ? p : "physnet";
}

Result sh(const std::string& args) {
  const std::string cmd = cli() + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("physnet_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("run on the ring") {
  const fs::path d = scratch("ring");
  const Result r = sh("run --scenario builtin:ring --h 0.05 --seed 3 --out " + d.string());
  REQUIRE(r.code == 0);
  const Json summary = Json::parse(r.out);
  CHECK(summary["status"] == "converged");
  const Json report = Json::parse(physnet::read_text_file((d / "report.json").string()));
  CHECK(report["cost"].get<double>() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-4));
  CHECK(fs::exists(d / "trajectory.csv"));
  const Json state = Json::parse(physnet::read_text_file((d / "final_state.json").string()));
  CHECK(state["x"].size() == 3);

  // Same seed, same bytes.
  const fs::path d2 = scratch("ring2");
  REQUIRE(sh("run --scenario builtin:ring --h 0.05 --seed 3 --out " + d2.string()).code == 0);
  CHECK(physnet::read_text_file((d / "trajectory.csv").string()) ==
        physnet::read_text_file((d2 / "trajectory.csv").string()));
}

TEST_CASE("bad inputs exit with 2") {
  CHECK(sh("run --scenario /nonexistent.json").code == 2);
  CHECK(sh("run --scenario builtin:ring --h 1.5").code == 2);
  CHECK(sh("run --scenario builtin:ring --dynamics two-norm --g power:2").code == 2);
  CHECK(sh("run --no-such-flag").code == 2);
  CHECK(sh("export --scenario builtin:ring --state x.json --format xyz").code == 2);
}

TEST_CASE("bow-tie run at L = 8") {
  const fs::path d = scratch("bowtie");
  const Result r = sh("run --scenario builtin:bowtie:8 --h 0.05 --out " + d.string());
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["cost"].get<double>() == doctest::Approx(15.3).epsilon(0.02));
}

TEST_CASE("sweep conserves flow across the cut") {
  const fs::path d = scratch("sweep");
  const Result r = sh("sweep --h 0.05 --values 7,10.3,inf --out " + d.string());
  REQUIRE(r.code == 0);
  std::istringstream csv(physnet::read_text_file((d / "sweep_summary.csv").string()));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "L,q_b,q_m,q_t,x_m,cost,energy,gap");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      v.push_back(cell == "inf" ? INFINITY : std::stod(cell));
    }
    REQUIRE(v.size() == 8);
    CHECK(std::abs(v[1]) + std::abs(v[2]) + std::abs(v[3]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(v[1] + v[2] + v[3] == doctest::Approx(1.0).epsilon(1e-6));
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("certify") {
  const Result ok = sh("certify --scenario builtin:ring --h 0.05 --seed 2");
  CHECK(ok.code == 0);
  CHECK(Json::parse(ok.out)["pass"] == true);
  CHECK(sh("certify --scenario builtin:ring --h 0.05 --max-steps 10").code == 1);

  const fs::path d = scratch("certify");
  REQUIRE(sh("run --scenario builtin:ring --h 0.05 --out " + d.string()).code == 0);
  CHECK(sh("certify --scenario builtin:ring --state " + (d / "final_state.json").string()).code == 0);
}

TEST_CASE("export and gen-scenario") {
  const fs::path d = scratch("export");
  REQUIRE(sh("run --scenario builtin:ring --h 0.05 --out " + d.string()).code == 0);
  const Result dot = sh("export --scenario builtin:ring --format dot --state " + (d / "final_state.json").string());
  REQUIRE(dot.code == 0);
  std::size_t edges = 0;
  for (std::size_t p = dot.out.find(" -- "); p != std::string::npos; p = dot.out.find(" -- ", p + 1)) ++edges;
  CHECK(edges == 3);
  const Result svg = sh("export --scenario builtin:ring --format svg --state " + (d / "final_state.json").string());
  CHECK(svg.out.rfind("<svg", 0) == 0);

  const fs::path scen = d / "lattice.json";
  REQUIRE(sh("gen-scenario --kind lattice --rows 4 --cols 5 --terminals 3 --out " + scen.string()).code == 0);
  const physnet::Scenario s = physnet::load_scenario(scen.string());
  CHECK(s.instance.num_nodes() == 20);
  CHECK(s.instance.num_commodities() == 3);
  const fs::path run_dir = d / "lattice_run";
  CHECK(sh("run --scenario " + scen.string() + " --h 0.1 --out " + run_dir.string()).code == 0);
}
