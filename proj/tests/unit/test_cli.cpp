#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "nltraffic/config.hpp"
#include "nltraffic/grid.hpp"

using namespace nltraffic;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string preset(const std::string& name) {
  return std::string(PRESET_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_tmp(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("presets parse") {
    for (const char* p : {"smooth.json", "example1.json", "converge_example1.json"})
      CHECK_NOTHROW((void)RunConfig::from_json_file(preset(p)));
  }

  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS((void)RunConfig::from_json_text(R"({"horizont": 1.0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)RunConfig::from_json_text(R"({"picard": {"windw": 0.2}})"),
                    std::invalid_argument);
  }

  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS((void)RunConfig::from_json_text(R"({"horizon": -1.0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (void)RunConfig::from_json_text(R"({"picard": {"contraction_target": 1.5}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)RunConfig::from_json_text(R"({"initial": {"kind": "csv", "rho_csv": ["nope.csv"]}})"),
        std::invalid_argument);
  }

  SUBCASE("custom descriptor may carry its initial data in the same document") {
    RunConfig c = RunConfig::from_json_text(R"({
      "model": {"name": "custom", "params": {
        "kernel": {"family": "gaussian", "sigma": 0.5},
        "v_nl": {"family": "zero"},
        "v_l": {"family": "example1"},
        "initial": {"kind": "example1", "n": 8}
      }},
      "grid": {"x_min": -2.0078125, "x_max": 2.9921875, "n_cells": 320}
    })");
    CHECK(c.initial.kind == "example1");
    BuiltModel m = c.build_model();
    State s = c.build_initial_state(m);
    CHECK(linf_norm(s.r) == 1.0);
  }

  SUBCASE("example1 grids put the kinks on cell centers") {
    for (int n : {4, 8, 16, 32}) {
      Grid1D g = example1_grid(n);
      double dx = g.dx();
      CHECK(dx == doctest::Approx(1.0 / (8 * n)).epsilon(1e-15));
      bool found = false;
      for (int j = 0; j < g.n_cells; ++j)
        if (g.center(j) == 1.0) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("cli exit codes") {
  SUBCASE("simulate on the stationary preset succeeds") {
    CHECK(run_cli("simulate --config " + preset("example1.json") + " --out /tmp/nlt_cli_ex1") == 0);
    CHECK(fs::exists("/tmp/nlt_cli_ex1/state_final.csv"));
    CHECK(fs::exists("/tmp/nlt_cli_ex1/picard_report.json"));
    // the stationary pair is a fixed point: final equals initial apart
    // from the time line of the header
    std::string a = slurp("/tmp/nlt_cli_ex1/state_initial.csv");
    std::string b = slurp("/tmp/nlt_cli_ex1/state_final.csv");
    CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
  }

  SUBCASE("zero horizon: output equals input") {
    std::string cfg = write_tmp("nlt_zero_horizon.json", R"({
      "experiment": "simulate",
      "model": {"name": "example1", "params": {}},
      "grid": {"x_min": -2.0078125, "x_max": 2.9921875, "n_cells": 320},
      "initial": {"kind": "example1", "n": 8},
      "horizon": 0.0,
      "output": {"dir": "/tmp/nlt_cli_zero"}
    })");
    CHECK(run_cli("simulate --config " + cfg) == 0);
    CHECK(slurp("/tmp/nlt_cli_zero/state_final.csv").substr(7) ==
          slurp("/tmp/nlt_cli_zero/state_initial.csv").substr(7));  // skip the time line
  }

  SUBCASE("config errors exit 2") {
    std::string bad = write_tmp("nlt_bad.json", R"({"horizon": "soon"})");
    CHECK(run_cli("simulate --config " + bad) == 2);
    CHECK(run_cli("simulate --config /does/not/exist.json") == 2);
  }

  SUBCASE("solver failure exits 1 (domain too small)") {
    std::string cfg = write_tmp("nlt_small.json", R"({
      "experiment": "simulate",
      "model": {"name": "gaussian-greenshields", "params": {"k": 1}},
      "grid": {"x_min": -1.0, "x_max": 1.0, "n_cells": 64},
      "initial": {"kind": "bumps", "rho": [[0.3, 0.0, 0.9]]},
      "horizon": 5.0,
      "output": {"dir": "/tmp/nlt_cli_small"}
    })");
    CHECK(run_cli("simulate --config " + cfg) == 1);
  }

  SUBCASE("identical config produces bit-identical CSVs") {
    std::string cfg = preset("example1.json");
    REQUIRE(run_cli("simulate --config " + cfg + " --out /tmp/nlt_det_a") == 0);
    REQUIRE(run_cli("simulate --config " + cfg + " --out /tmp/nlt_det_b") == 0);
    CHECK(slurp("/tmp/nlt_det_a/state_final.csv") == slurp("/tmp/nlt_det_b/state_final.csv"));
    CHECK(slurp("/tmp/nlt_det_a/state_0000.csv") == slurp("/tmp/nlt_det_b/state_0000.csv"));
  }
}

TEST_CASE("cli verify: negative control via the broken-flux hook") {
  // with the hook the solver is deliberately non-conservative, so the mass
  // checks themselves must fail and the command must exit nonzero
  std::string cfg = write_tmp("nlt_hook.json", R"({
    "experiment": "verify",
    "model": {"name": "gaussian-greenshields",
              "params": {"k": 1, "sigma": 0.4}},
    "grid": {"x_min": -4.0, "x_max": 6.0, "n_cells": 200},
    "initial": {"kind": "bumps", "rho": [[0.2, 0.0, 0.8]], "r": [0.3, -1.0, 1.0]},
    "horizon": 0.2,
    "picard": {"nonconservative_hook": true},
    "output": {"dir": "/tmp/nlt_cli_hook"}
  })");
  std::string cmd = std::string(CLI_BINARY) + " verify --config " + cfg +
                    " > /tmp/nlt_cli_hook_out.txt 2>&1";
  int st = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(st) == 1);
  std::string out = slurp("/tmp/nlt_cli_hook_out.txt");
  CHECK(out.find("FAIL mass conservation") != std::string::npos);
}

TEST_CASE("cli verify: stationary preset passes every check") {
  std::string cfg = write_tmp("nlt_verify_ex1.json", R"({
    "experiment": "verify",
    "model": {"name": "example1", "params": {}},
    "grid": {"x_min": -2.0078125, "x_max": 2.9921875, "n_cells": 320},
    "initial": {"kind": "example1", "n": 8},
    "horizon": 0.5,
    "picard": {"window": 0.25},
    "output": {"dir": "/tmp/nlt_cli_vex1"}
  })");
  CHECK(run_cli("verify --config " + cfg) == 0);
}

TEST_CASE("cli example1 sweep emits the distance table") {
  std::string cfg = write_tmp("nlt_sweep.json", R"({
    "experiment": "example1",
    "model": {"name": "example1", "params": {}},
    "initial": {"kind": "example1", "n": 8},
    "n_list": [4, 8],
    "output": {"dir": "/tmp/nlt_cli_sweep"}
  })");
  CHECK(run_cli("example1 --config " + cfg) == 0);
  std::string rep = slurp("/tmp/nlt_cli_sweep/example1_report.json");
  CHECK(rep.find("initial_l1_distance") != std::string::npos);
  CHECK(rep.find("stationarity_drift") != std::string::npos);
}
