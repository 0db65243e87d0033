#ifndef NLTRAFFIC_COUPLER_HPP
#define NLTRAFFIC_COUPLER_HPP

#include <string>
#include <vector>

#include "nltraffic/grid.hpp"
#include "nltraffic/local.hpp"
#include "nltraffic/model.hpp"
#include "nltraffic/nonlocal.hpp"

namespace nltraffic {

struct PicardConfig {
  double window = 0.25;        // initial window length guess
  double tol = 1e-10;          // sup-in-time L1-in-space residual threshold
  int max_iter = 25;
  double min_window = 1e-3;
  double contraction_target = 0.9;
  double cfl_safety = 0.45;    // of dx/speed; half the per-op 0.9 bound
  double boundary_mass_tol = 1e-8;  // fraction of total mass allowed near edges
  int output_stride = 0;       // 0: window ends only
  bool nonconservative_hook = false;  // negative-control test hook
  bool keep_slabs = false;     // retain every window slab (diagnostics)
};

struct WindowEntry {
  double t0 = 0.0;
  double len = 0.0;
  int iterations = 0;
  std::vector<double> residuals;
  double observed_contraction = 0.0;  // last residual ratio, 0 if converged in one pass
  int dt_halvings = 0;
};

struct PicardReport {
  std::vector<WindowEntry> windows;
  long total_solves = 0;  // nonlocal + local sub-solves
  double wall_seconds = 0.0;
  std::string to_json() const;
};

/// Picard iteration on one window: the informed classes are solved with the
/// local history frozen at the previous iterate (seeded with r held constant
/// at its initial value), then the local class is solved with the new
/// informed slab frozen; stop when the sup-in-time L1 residual between
/// consecutive local iterates drops below tol.
struct WindowResult {
  SpaceTimeSlab slab;  // rho and r over the window, shared time grid
  WindowEntry entry;
  bool converged = false;  // false requests "shrink window"
};

WindowResult solve_window(const State& state0, double window, const PicardConfig& config,
                          const BuiltModel& model);

struct EvolveResult {
  State final_state;
  std::vector<State> outputs;  // stride samples plus every window end
  PicardReport report;
  std::vector<SpaceTimeSlab> slabs;  // filled when config.keep_slabs is set
};

/// Global time-marching: chains contraction windows across [0, horizon],
/// halving the window on non-contraction (error below min_window) and
/// guarding against mass reaching the domain edge ("domain too small").
/// A zero horizon returns the input state unchanged.
EvolveResult evolve(const State& state0, double horizon, const PicardConfig& config,
                    const BuiltModel& model);

/// Distance amplification of two evolutions in the W11 x L1 norm.
struct LipschitzProbe {
  std::vector<double> times;
  std::vector<double> alpha;    // ||S_t u - S_t u_hat|| / ||u - u_hat||
  double fitted_C = 0.0;        // smallest C with alpha(t) <= 1 + C t
  bool degenerate = false;      // zero initial distance
  std::vector<double> alpha_l1; // same curve in the plain L1 pair norm
};

LipschitzProbe lipschitz_probe(const State& state0, const State& perturbed0, double horizon,
                               const PicardConfig& config, const BuiltModel& model);

/// W11 x L1 pair norm of a state difference (sum of per-class W11 plus L1 of r).
double pair_norm_w11_l1(const State& a, const State& b);
/// Plain L1 pair norm (all classes plus r).
double pair_norm_l1(const State& a, const State& b);

State slab_state(const SpaceTimeSlab& slab, int step, double t0_offset = 0.0);

}  // namespace nltraffic

#endif
