// Command-line driver: simulate | verify | example1 | converge.
// Exit codes: 0 ok, 1 solver failure, 2 config error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nltraffic/config.hpp"
#include "nltraffic/coupler.hpp"
#include "nltraffic/local.hpp"
#include "nltraffic/verify.hpp"

namespace fs = std::filesystem;
using namespace nltraffic;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int levels = 0;
  unsigned long seed = 0;
  bool have_seed = false;
};

RunConfig load_config(const CliOptions& opt) {
  RunConfig cfg = RunConfig::from_json_file(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.levels > 0) cfg.levels = opt.levels;
  if (opt.have_seed) cfg.seed = opt.seed;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

int cmd_simulate(const RunConfig& cfg) {
  BuiltModel model = cfg.build_model();
  State s0 = cfg.build_initial_state(model);
  write_state_csv(s0, cfg.out_dir + "/state_initial.csv");
  EvolveResult res = evolve(s0, cfg.horizon, cfg.picard, model);
  int idx = 0;
  for (const State& s : res.outputs) {
    char name[64];
    std::snprintf(name, sizeof(name), "/state_%04d.csv", idx++);
    write_state_csv(s, cfg.out_dir + name);
  }
  write_state_csv(res.final_state, cfg.out_dir + "/state_final.csv");
  write_text(cfg.out_dir + "/picard_report.json", res.report.to_json());
  std::cout << "simulate: " << res.report.windows.size() << " windows, "
            << res.report.total_solves << " sub-solves, wall " << res.report.wall_seconds
            << " s\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  BuiltModel model = cfg.build_model();
  State s0 = cfg.build_initial_state(model);

  PicardConfig pc = cfg.picard;
  pc.keep_slabs = true;
  VerificationSummary summary;

  EvolveResult res;
  bool evolved = false;
  try {
    res = evolve(s0, cfg.horizon, pc, model);
    evolved = true;
  } catch (const std::exception& e) {
    summary.checks.push_back({"evolution", false, 0.0, 0.0, e.what()});
  }

  {  // standing-hypothesis screening of the model ingredients
    ValidationReport hyp = validate_hypotheses(model.kernels, model.v_nl, model.v_l, 200, cfg.seed);
    CheckResult c;
    c.name = "hypothesis screening";
    c.pass = hyp.all_pass();
    c.measured = c.pass ? 0.0 : 1.0;
    for (const auto& h : hyp.checks)
      if (!h.pass) c.detail += h.name + " failed; ";
    summary.checks.push_back(c);
  }

  if (evolved) {
    bool physical = true;
    for (const Field& c : s0.rho)
      for (double v : c) physical = physical && v >= 0.0;
    for (double v : s0.r) physical = physical && v >= 0.0 && v <= model.v_l.R_L;

    auto mass_checks = check_mass_conservation(res.outputs, s0, physical);
    summary.checks.insert(summary.checks.end(), mass_checks.begin(), mass_checks.end());
    auto inv = check_invariance(res.outputs, model.v_l.R_L);
    summary.checks.insert(summary.checks.end(), inv.begin(), inv.end());

    // refinement reference for the semigroup bound
    Grid1D fine(s0.grid.x_min, s0.grid.x_max, 2 * s0.grid.n_cells);
    State sf = cfg.build_initial_state(model, fine);
    double ref_dist = 0.0;
    try {
      EvolveResult rf = evolve(sf, cfg.horizon, cfg.picard, model);
      State restricted = make_state(s0.grid, s0.class_count());
      for (int i = 0; i < s0.class_count(); ++i)
        for (int j = 0; j < s0.grid.n_cells; ++j)
          restricted.rho[i][j] =
              0.5 * (rf.final_state.rho[i][2 * j] + rf.final_state.rho[i][2 * j + 1]);
      for (int j = 0; j < s0.grid.n_cells; ++j)
        restricted.r[j] = 0.5 * (rf.final_state.r[2 * j] + rf.final_state.r[2 * j + 1]);
      ref_dist = pair_norm_l1(res.final_state, restricted);
    } catch (const std::exception&) {
      ref_dist = 0.0;
    }
    summary.checks.push_back(check_semigroup(s0, cfg.horizon, cfg.picard, model,
                                             std::max(ref_dist, 1e-12)));
    summary.checks.push_back(check_half_tv(10000, cfg.seed));
    summary.checks.push_back(check_tv_growth(res.slabs, model.v_l));

    if (model.v_nl.w3inf_bound > 0) {
      CrossSolverResult xs = check_cross_solver(model, s0, std::min(cfg.horizon, 0.5), 0.05);
      summary.checks.push_back(xs.check);
      summary.checks.push_back(check_jacobian_bound(xs.diag_coarse, std::min(cfg.horizon, 0.5)));
    } else {
      summary.checks.push_back(
          {"cross-solver agreement (FV vs characteristics)", true, 0.0, 0.0,
           "informed speed law identically zero; both solvers are exact"});
    }

    {  // one-cell translation probe
      State pert = s0;
      for (int i = 0; i < s0.class_count(); ++i) {
        Field shifted(s0.grid.n_cells, 0.0);
        for (int j = 1; j < s0.grid.n_cells; ++j) shifted[j] = s0.rho[i][j - 1];
        pert.rho[i] = shifted;
      }
      LipschitzProbe probe = lipschitz_probe(s0, pert, std::min(cfg.horizon, 0.5), cfg.picard, model);
      summary.checks.push_back(check_lipschitz(probe, 100.0));
    }

    summary.checks.push_back(check_determinism(s0, std::min(cfg.horizon, 0.25), cfg.picard, model));
  }

  std::cout << summary.to_text();
  write_text(cfg.out_dir + "/verification.json", summary.to_json());
  return summary.all_pass() ? 0 : 1;
}

int cmd_example1(const RunConfig& cfg) {
  BuiltModel model = builtin_model("example1", "{}");
  nlohmann::json rows = nlohmann::json::array();
  std::cout << "   n    dx        initial L1   final L1     stationarity drift\n";
  for (int n : cfg.n_list) {
    Grid1D grid = example1_grid(n);
    InitialDatum dn = example1_datum(grid, n);
    InitialDatum dl = example1_limit_datum(grid);
    State sn = make_state(grid, 1), sl = make_state(grid, 1);
    sn.rho = dn.rho0;
    sn.r = dn.r0;
    sl.rho = dl.rho0;
    sl.r = dl.r0;

    double d0 = pair_norm_l1(sn, sl);
    EvolveResult rn = evolve(sn, 0.5, cfg.picard, model);
    EvolveResult rl = evolve(sl, 0.5, cfg.picard, model);
    double d1 = pair_norm_l1(rn.final_state, rl.final_state);
    double drift = pair_norm_l1(rn.final_state, sn);

    char line[160];
    std::snprintf(line, sizeof(line), "%4d  %.6f  %.6e  %.6e  %.3e\n", n, grid.dx(), d0, d1,
                  drift);
    std::cout << line;
    rows.push_back({{"n", n},
                    {"dx", grid.dx()},
                    {"initial_l1_distance", d0},
                    {"final_l1_distance", d1},
                    {"stationarity_drift", drift}});
  }
  write_text(cfg.out_dir + "/example1_report.json", rows.dump(2));
  return 0;
}

// Restriction onto the coarse grid: inject when a fine center coincides with
// the coarse center (exact for center-sampled data, in particular for the
// grid-exact stationary family), otherwise average the covered fine cells.
Field restrict_to(const Field& fine, const Grid1D& fg, const Grid1D& cg) {
  Field out(cg.n_cells, 0.0);
  std::vector<int> count(cg.n_cells, 0);
  std::vector<bool> matched(cg.n_cells, false);
  const double tol = 1e-9 * cg.dx();
  for (int j = 0; j < fg.n_cells; ++j) {
    double x = fg.center(j);
    if (x < cg.x_min || x > cg.x_max) continue;
    int i = std::min(static_cast<int>((x - cg.x_min) / cg.dx()), cg.n_cells - 1);
    if (std::abs(x - cg.center(i)) < tol) {
      out[i] = fine[j];
      matched[i] = true;
      count[i] = 1;
    } else if (!matched[i]) {
      out[i] += fine[j];
      count[i]++;
    }
  }
  for (int i = 0; i < cg.n_cells; ++i)
    if (count[i] > 1) out[i] /= count[i];
  return out;
}

int cmd_converge(const RunConfig& cfg) {
  BuiltModel model = cfg.build_model();
  const bool ex1 = cfg.initial.kind.rfind("example1", 0) == 0;

  std::vector<State> finals;
  std::vector<Grid1D> grids;
  for (int lev = 0; lev < cfg.levels + 1; ++lev) {
    Grid1D g = ex1 ? example1_grid(cfg.initial.n, lev)
                   : Grid1D(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_cells << lev);
    State s0 = cfg.build_initial_state(model, g);
    EvolveResult res = evolve(s0, cfg.horizon, cfg.picard, model);
    finals.push_back(res.final_state);
    grids.push_back(g);
  }

  nlohmann::json table = nlohmann::json::array();
  std::cout << "level  cells      dist_rho      dist_r        order\n";
  double prev_total = 0.0;
  bool monotone = true;
  for (int lev = 0; lev + 1 < static_cast<int>(finals.size()); ++lev) {
    double drho = 0.0;
    for (int i = 0; i < finals[lev].class_count(); ++i)
      drho += l1_distance(finals[lev].rho[i],
                          restrict_to(finals[lev + 1].rho[i], grids[lev + 1], grids[lev]),
                          grids[lev].dx());
    double dr = l1_distance(finals[lev].r,
                            restrict_to(finals[lev + 1].r, grids[lev + 1], grids[lev]),
                            grids[lev].dx());
    double total = drho + dr;
    double order = (lev > 0 && total > 0) ? std::log2(prev_total / total) : 0.0;
    if (lev > 0 && total > prev_total && total > 1e-12) monotone = false;
    char line[160];
    std::snprintf(line, sizeof(line), "%5d  %6d  %.6e  %.6e  %s\n", lev, grids[lev].n_cells,
                  drho, dr, lev > 0 ? std::to_string(order).c_str() : "-");
    std::cout << line;
    table.push_back(
        {{"level", lev}, {"cells", grids[lev].n_cells}, {"dist_rho", drho}, {"dist_r", dr},
         {"order", lev > 0 ? order : 0.0}});
    prev_total = total;
  }
  if (!monotone) std::cout << "note: non-monotone self-distance sequence\n";
  write_text(cfg.out_dir + "/convergence.json", table.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed nonlocal-local traffic solver"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--levels", opt.levels, "refinement levels (converge)");
    sub->add_option("--seed", opt.seed, "sampling seed override")->each([&](std::string) {
      opt.have_seed = true;
    });
  };
  CLI::App* sim = app.add_subcommand("simulate", "run a simulation and dump states");
  CLI::App* ver = app.add_subcommand("verify", "run the invariant verification suite");
  CLI::App* ex1 = app.add_subcommand("example1", "reproduce the stationary-example study");
  CLI::App* cnv = app.add_subcommand("converge", "grid self-convergence study");
  for (CLI::App* s : {sim, ver, ex1, cnv}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(opt);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (ver->parsed()) return cmd_verify(cfg);
    if (ex1->parsed()) return cmd_example1(cfg);
    if (cnv->parsed()) return cmd_converge(cfg);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  }
}
