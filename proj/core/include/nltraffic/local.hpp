#ifndef NLTRAFFIC_LOCAL_HPP
#define NLTRAFFIC_LOCAL_HPP

#include <vector>

#include "nltraffic/grid.hpp"
#include "nltraffic/model.hpp"

namespace nltraffic {

/// Flux data for the local equation at one instant: the coefficient field
/// Sigma rho sampled at cell centers, and the speed law, giving
/// w(x_j, q) = v_L(coeff_j + q) and f_j(q) = q * w(x_j, q).
struct LocalFlux {
  const LocalSpeedLaw* law = nullptr;
  Field coeff;  // Sigma rho at cell centers

  double w(int j, double q) const { return law->profile(coeff[j] + q); }
  double f(int j, double q) const { return q * law->profile(coeff[j] + q); }
  double fprime(int j, double q) const {
    return law->profile(coeff[j] + q) + q * law->d1(coeff[j] + q);
  }
};

/// sup over sampled (x, q) of |w + q dw/dq|, the maximal wave speed used for
/// the CFL bound and the boundary-safety margin. r_range defaults to
/// [0, R_L]; q is swept over a dense deterministic grid.
double max_wave_speed(const LocalFlux& flux, double r_lo, double r_hi, int q_samples = 256);
double max_wave_speed(const LocalFlux& flux);

/// One forward-Euler step of the monotone finite-volume scheme.
///
/// Interface flux is the demand-supply (Godunov-type) flux with one-sided
/// flux functions: F_{j+1/2} = min( D_j, S_{j+1} ) where
///   D_j     = max of f_j over [0, r_j]        (nondecreasing in r_j)
///   S_{j+1} = max of f_{j+1} over [r_{j+1}, R] (nonincreasing in r_{j+1})
/// both clamped at 0 (f vanishes at the interval ends that realize them).
/// For x-independent flux this is exactly the Godunov flux of bell-shaped
/// fluxes; the one-sided evaluation makes cells at local capacity
/// (coeff + r at the v_L zero) supply exactly zero, so sampled equilibria of
/// the stationary example are bitwise fixed points.
///
/// Preconditions: dt * max_wave_speed <= 0.9 * dx (throws "CFL violation").
Field local_step(const Field& r, const LocalFlux& flux, double dt, double dx);

/// Test hook: same update with a deliberately non-conservative flux
/// perturbation, used as a negative control for the mass-conservation check.
Field local_step_nonconservative(const Field& r, const LocalFlux& flux, double dt, double dx);

/// Exact entropy solution of the Riemann problem for the x-independent flux
/// f(r) = r * v_L(r), restricted to strictly concave or convex fluxes over
/// the data range (throws "oracle limited to convex/concave flux").
/// Returns the self-similar solution value at (t, x) with the jump at x=0.
double riemann_oracle(double r_l, double r_r, const LocalSpeedLaw& law, double t, double x);

}  // namespace nltraffic

#endif
