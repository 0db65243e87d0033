#include "nltraffic/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nltraffic {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

InitialSpec parse_initial(const json& j) {
  reject_unknown(j, {"kind", "n", "rho", "r", "r_l", "r_r", "x0", "rho_csv", "r_csv"}, "initial");
  InitialSpec s;
  s.kind = j.value("kind", "bumps");
  s.n = j.value("n", 8);
  if (j.contains("rho"))
    for (const auto& b : j["rho"]) s.rho_bumps.push_back(b.get<std::vector<double>>());
  if (j.contains("r") && !j["r"].is_null()) s.r_bump = j["r"].get<std::vector<double>>();
  s.r_l = j.value("r_l", 0.0);
  s.r_r = j.value("r_r", 0.0);
  s.x0 = j.value("x0", 0.0);
  if (j.contains("rho_csv")) s.rho_csv = j["rho_csv"].get<std::vector<std::string>>();
  s.r_csv = j.value("r_csv", "");
  const std::set<std::string> kinds{"bumps", "example1", "example1-limit", "riemann", "csv",
                                    "zero"};
  if (!kinds.count(s.kind)) throw std::invalid_argument("config: unknown initial kind " + s.kind);
  for (const auto& p : s.rho_csv)
    if (!std::filesystem::exists(p))
      throw std::invalid_argument("config: missing csv file " + p);
  if (!s.r_csv.empty() && !std::filesystem::exists(s.r_csv))
    throw std::invalid_argument("config: missing csv file " + s.r_csv);
  return s;
}

PicardConfig parse_picard(const json& j) {
  reject_unknown(j,
                 {"window", "tol", "max_iter", "min_window", "contraction_target", "cfl_safety",
                  "boundary_mass_tol", "output_stride", "nonconservative_hook", "keep_slabs"},
                 "picard");
  PicardConfig p;
  p.window = j.value("window", p.window);
  p.tol = j.value("tol", p.tol);
  p.max_iter = j.value("max_iter", p.max_iter);
  p.min_window = j.value("min_window", p.min_window);
  p.contraction_target = j.value("contraction_target", p.contraction_target);
  p.cfl_safety = j.value("cfl_safety", p.cfl_safety);
  p.boundary_mass_tol = j.value("boundary_mass_tol", p.boundary_mass_tol);
  p.output_stride = j.value("output_stride", p.output_stride);
  p.nonconservative_hook = j.value("nonconservative_hook", false);
  p.keep_slabs = j.value("keep_slabs", false);
  if (!(p.contraction_target > 0 && p.contraction_target < 1))
    throw std::invalid_argument("config: contraction_target must lie in (0,1)");
  if (!(p.min_window <= p.window)) throw std::invalid_argument("config: min_window > window");
  if (!(p.tol > 0)) throw std::invalid_argument("config: tol must be positive");
  return p;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  try {
    return from_json_impl(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::from_json_impl(const std::string& text) {
  json j = json::parse(text);
  reject_unknown(j,
                 {"experiment", "model", "grid", "initial", "horizon", "picard", "output",
                  "levels", "n_list", "seed"},
                 "config root");
  RunConfig c;
  c.experiment = j.value("experiment", "simulate");
  if (j.contains("model")) {
    reject_unknown(j["model"], {"name", "params"}, "model");
    c.model_name = j["model"].value("name", c.model_name);
    if (j["model"].contains("params")) c.model_params = j["model"]["params"].dump();
    // a custom descriptor may carry its initial data in the same document;
    // a root-level "initial" section overrides it
    if (c.model_name == "custom" && j["model"]["params"].contains("initial"))
      c.initial = parse_initial(j["model"]["params"]["initial"]);
  }
  if (j.contains("grid")) {
    reject_unknown(j["grid"], {"x_min", "x_max", "n_cells"}, "grid");
    c.grid = Grid1D(j["grid"].value("x_min", -4.0), j["grid"].value("x_max", 6.0),
                    j["grid"].value("n_cells", 800));
  }
  if (j.contains("initial")) c.initial = parse_initial(j["initial"]);
  c.horizon = j.value("horizon", 1.0);
  if (c.horizon < 0) throw std::invalid_argument("config: horizon must be nonnegative");
  if (j.contains("picard")) c.picard = parse_picard(j["picard"]);
  if (j.contains("output")) {
    reject_unknown(j["output"], {"dir", "stride"}, "output");
    c.out_dir = j["output"].value("dir", c.out_dir);
    c.picard.output_stride = j["output"].value("stride", c.picard.output_stride);
  }
  c.levels = j.value("levels", 3);
  if (j.contains("n_list")) c.n_list = j["n_list"].get<std::vector<int>>();
  c.seed = j.value("seed", 12345UL);
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["model"] = {{"name", model_name}, {"params", json::parse(model_params)}};
  j["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n_cells", grid.n_cells}};
  j["horizon"] = horizon;
  j["seed"] = seed;
  return j.dump(2);
}

BuiltModel RunConfig::build_model() const {
  if (model_name == "custom") return model_from_descriptor(model_params);
  return builtin_model(model_name, model_params);
}

State RunConfig::build_initial_state(const BuiltModel& model) const {
  return build_initial_state(model, grid);
}

State RunConfig::build_initial_state(const BuiltModel& model, const Grid1D& g) const {
  const int k = static_cast<int>(model.kernels.size());
  State s = make_state(g, k);

  if (initial.kind == "zero") return s;

  if (initial.kind == "example1" || initial.kind == "example1-limit") {
    if (k != 1) throw std::invalid_argument("config: example1 data need a single class");
    InitialDatum d = initial.kind == "example1" ? example1_datum(g, initial.n)
                                                : example1_limit_datum(g);
    s.rho = d.rho0;
    s.r = d.r0;
    return s;
  }
  if (initial.kind == "riemann") {
    for (int j = 0; j < g.n_cells; ++j) s.r[j] = g.center(j) < initial.x0 ? initial.r_l : initial.r_r;
    return s;
  }
  if (initial.kind == "csv") {
    if (static_cast<int>(initial.rho_csv.size()) != k)
      throw std::invalid_argument("config: csv initial needs one file per class");
    for (int i = 0; i < k; ++i) s.rho[i] = field_from_csv(g, initial.rho_csv[i]);
    if (!initial.r_csv.empty()) s.r = field_from_csv(g, initial.r_csv);
    return s;
  }
  // bumps
  for (int i = 0; i < k; ++i) {
    if (i < static_cast<int>(initial.rho_bumps.size())) {
      const auto& b = initial.rho_bumps[i];
      if (b.size() != 3) throw std::invalid_argument("config: bump spec needs [amp,center,width]");
      s.rho[i] = bump_field(g, b[0], b[1], b[2]);
    }
  }
  if (initial.r_bump.size() == 3)
    s.r = bump_field(g, initial.r_bump[0], initial.r_bump[1], initial.r_bump[2]);
  return s;
}

Grid1D example1_grid(int n, int refine) {
  if (n < 1) throw std::invalid_argument("example1_grid: n must be >= 1");
  double dx = 1.0 / (8.0 * n) / std::pow(2.0, refine);
  int cells = static_cast<int>(std::lround(5.0 / dx));
  return Grid1D(-2.0 - 0.5 * dx, 3.0 - 0.5 * dx, cells);
}

}  // namespace nltraffic
