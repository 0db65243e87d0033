#ifndef NLTRAFFIC_CONFIG_HPP
#define NLTRAFFIC_CONFIG_HPP

#include <string>
#include <vector>

#include "nltraffic/coupler.hpp"
#include "nltraffic/grid.hpp"
#include "nltraffic/model.hpp"

namespace nltraffic {

/// Initial-data selector. kind in {"bumps", "example1", "example1-limit",
/// "riemann", "csv", "zero"}.
struct InitialSpec {
  std::string kind = "bumps";
  int n = 8;                                   // example1
  std::vector<std::vector<double>> rho_bumps;  // per class [amp, center, width]
  std::vector<double> r_bump;                  // [amp, center, width] or empty
  double r_l = 0.0, r_r = 0.0, x0 = 0.0;       // riemann (in r; rho = 0)
  std::vector<std::string> rho_csv;
  std::string r_csv;
};

/// One experiment description, loadable from JSON. Unknown keys are
/// rejected so typos fail fast (exit code 2 paths in the CLI).
struct RunConfig {
  std::string experiment = "simulate";
  std::string model_name = "gaussian-greenshields";
  std::string model_params = "{}";
  Grid1D grid{-4.0, 6.0, 800};
  InitialSpec initial;
  double horizon = 1.0;
  PicardConfig picard;
  std::string out_dir = "out";
  int levels = 3;
  std::vector<int> n_list{4, 8, 16, 32};
  unsigned long seed = 12345;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_impl(const std::string& text);
  std::string to_json() const;

  BuiltModel build_model() const;
  State build_initial_state(const BuiltModel& model) const;
  State build_initial_state(const BuiltModel& model, const Grid1D& g) const;
};

/// Grid whose cell centers land on the multiples of dx = 1/(8n), so the
/// kinks of the stationary-example data sit exactly on centers. Covers
/// [-2 - dx/2, 3 - dx/2] with 40 n cells; `refine` doubles the resolution
/// while keeping the alignment (the domain shifts by a quarter cell).
Grid1D example1_grid(int n, int refine = 0);

}  // namespace nltraffic

#endif
