#ifndef NLTRAFFIC_NONLOCAL_HPP
#define NLTRAFFIC_NONLOCAL_HPP

#include <functional>
#include <vector>

#include "nltraffic/grid.hpp"
#include "nltraffic/model.hpp"

namespace nltraffic {

/// Sampled per-class velocity and its exact space derivative at one instant.
/// dvdx is assembled analytically as v_NL'(u * eta) * (u * eta'), never by
/// differencing v: the derivative enters the characteristic Jacobian inside
/// an exponential where grid noise would amplify.
struct VelocityField {
  std::vector<Field> v;
  std::vector<Field> dvdx;
  int class_count() const { return static_cast<int>(v.size()); }
};

/// Densities (and optionally velocities) over a time window, shared time grid.
struct SpaceTimeSlab {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::vector<Field>> rho;  // [step][class]
  std::vector<Field> r;                 // [step]; empty for pure-nonlocal runs
  std::vector<VelocityField> velocity;  // optional, [step]

  int steps() const { return static_cast<int>(times.size()); }
  Field sum_rho(int step) const;
};

/// Midpoint-quadrature convolution against the kernel's effective support:
/// (f * eta)(x_j) = dx * sum_m f_m * eta(x_j - x_m), zero extension outside
/// the grid. Throws "under-resolved kernel" when the window spans < 4 cells.
Field convolve(const Field& f, const Kernel& kernel, const Grid1D& grid);

/// v^i_j = v_NL^i( ((Sigma rho + r) * eta^i)(x_j) ), plus the chain-rule
/// space derivative via eta'.
VelocityField assemble_velocity(const std::vector<Field>& rho, const Field& r,
                                const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl,
                                const Grid1D& grid);

/// Conservative upwind step for every class: interface velocity is the
/// average of the adjacent samples, flux v+ rho_j + v- rho_{j+1}.
/// Precondition dt*max|v| <= 0.9 dx per class ("CFL violation").
std::vector<Field> fv_step(const std::vector<Field>& rho, const VelocityField& vel, double dt,
                           double dx);

/// Test hook mirroring local_step_nonconservative.
std::vector<Field> fv_step_nonconservative(const std::vector<Field>& rho,
                                           const VelocityField& vel, double dt, double dx);

/// Backward-traced characteristic through a frozen velocity field.
struct CharacteristicTrace {
  double foot = 0.0;      // X(0; t, x)
  double jacobian = 1.0;  // E(0, t, x), strictly positive
  std::vector<double> dvdx_samples;
};

struct CharDiagnostics {
  double measured_Q = 0.0;     // sup |dv/dx| seen over the run
  double max_abs_logE = 0.0;   // max over cells and times of |log E|
  Field foot;                  // X(0; T, x_j) at the final time
  Field efac;                  // E(0, T, x_j) at the final time
};

/// Semi-Lagrangian solution of the nonlocal sub-problem with a frozen local
/// history: rho(t,x) = rho_o(X(0;t,x)) * E(0,t,x). Feet and Jacobians are
/// composed step by step (RK4, `subcycles` sub-steps per dt, velocity frozen
/// at the step start; the Jacobian integral uses the composite trapezoid
/// rule along the trace). r_at(step) supplies the local density history on
/// the same time grid.
///
/// Throws "characteristic trace exits grid" at setup when rho0 carries mass
/// within sup|v|*T + 2 dx of an edge; beyond-grid feet otherwise read the
/// zero extension of rho0.
std::pair<SpaceTimeSlab, CharDiagnostics> characteristics_solve(
    const std::vector<Field>& rho0, const std::function<const Field&(int)>& r_at,
    const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl, const Grid1D& grid,
    double dt, int n_steps, int subcycles = 2);

/// Backward trace of one characteristic through a slab that carries velocity
/// fields (fv_solve with store_velocity), from the slab's final time to 0.
/// Collects the dv/dx samples seen along the path and the accumulated
/// Jacobian, for the bound |log E| <= sup|dv/dx| * t.
CharacteristicTrace trace_characteristic(const SpaceTimeSlab& slab, int class_index, double x,
                                         int subcycles = 2);

/// Forward FV driver on the same interface, for cross-solver comparisons and
/// the Picard loop. store_velocity keeps per-step velocity fields in the slab.
SpaceTimeSlab fv_solve(const std::vector<Field>& rho0,
                       const std::function<const Field&(int)>& r_at,
                       const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl,
                       const Grid1D& grid, double dt, int n_steps, bool store_velocity = false,
                       bool nonconservative_hook = false);

}  // namespace nltraffic

#endif
