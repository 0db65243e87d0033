#include "nltraffic/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nltraffic {

Field SpaceTimeSlab::sum_rho(int step) const {
  const auto& classes = rho.at(step);
  Field s(grid.n_cells, 0.0);
  for (const Field& c : classes)
    for (int j = 0; j < grid.n_cells; ++j) s[j] += c[j];
  return s;
}

namespace {

// Kernel samples at grid offsets; offset o means source cell j-o.
struct KernelTable {
  int o_min, o_max;
  std::vector<double> w;  // dx * eta(o * dx)
};

KernelTable tabulate(const ScalarFn& eta, double back, double fwd, const Grid1D& grid) {
  const double dx = grid.dx();
  KernelTable t;
  // eta(o*dx) is nonzero for o*dx in [-back, fwd]
  t.o_min = -static_cast<int>(std::ceil(back / dx));
  t.o_max = static_cast<int>(std::ceil(fwd / dx));
  t.w.resize(t.o_max - t.o_min + 1);
  for (int o = t.o_min; o <= t.o_max; ++o) t.w[o - t.o_min] = dx * eta(o * dx);
  return t;
}

Field apply_table(const Field& f, const KernelTable& t, int N) {
  Field out(N, 0.0);
  for (int j = 0; j < N; ++j) {
    double acc = 0.0;
    int o_lo = std::max(t.o_min, j - (N - 1));
    int o_hi = std::min(t.o_max, j);
    const double* w = t.w.data() - t.o_min;
    for (int o = o_lo; o <= o_hi; ++o) acc += w[o] * f[j - o];
    out[j] = acc;
  }
  return out;
}

void check_resolution(const Kernel& k, const Grid1D& grid) {
  if ((k.support_back + k.support_fwd) / grid.dx() < 4.0)
    throw std::runtime_error("under-resolved kernel");
}

}  // namespace

Field convolve(const Field& f, const Kernel& kernel, const Grid1D& grid) {
  check_resolution(kernel, grid);
  KernelTable t = tabulate(kernel.evaluate, kernel.support_back, kernel.support_fwd, grid);
  return apply_table(f, t, grid.n_cells);
}

VelocityField assemble_velocity(const std::vector<Field>& rho, const Field& r,
                                const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl,
                                const Grid1D& grid) {
  const int N = grid.n_cells;
  const int k = static_cast<int>(rho.size());
  if (static_cast<int>(kernels.size()) != k || v_nl.class_count() != k)
    throw std::invalid_argument("assemble_velocity: class count mismatch");

  Field total(N, 0.0);
  for (const Field& c : rho)
    for (int j = 0; j < N; ++j) total[j] += c[j];
  if (!r.empty())
    for (int j = 0; j < N; ++j) total[j] += r[j];

  VelocityField out;
  out.v.assign(k, Field(N, 0.0));
  out.dvdx.assign(k, Field(N, 0.0));
  for (int i = 0; i < k; ++i) {
    if (v_nl.w3inf_bound == 0.0) continue;  // identically zero law
    check_resolution(kernels[i], grid);
    KernelTable te = tabulate(kernels[i].evaluate, kernels[i].support_back,
                              kernels[i].support_fwd, grid);
    KernelTable td =
        tabulate(kernels[i].d1, kernels[i].support_back, kernels[i].support_fwd, grid);
    Field arg = apply_table(total, te, N);
    Field darg = apply_table(total, td, N);
    const SpeedComponent& c = v_nl.components[i];
    for (int j = 0; j < N; ++j) {
      out.v[i][j] = c.f(arg[j]);
      out.dvdx[i][j] = c.d1(arg[j]) * darg[j];
    }
  }
  return out;
}

namespace {

std::vector<Field> fv_step_impl(const std::vector<Field>& rho, const VelocityField& vel,
                                double dt, double dx, double right_factor) {
  const int k = static_cast<int>(rho.size());
  std::vector<Field> out(k);
  const double lam = dt / dx;
  for (int i = 0; i < k; ++i) {
    const Field& u = rho[i];
    const Field& v = vel.v[i];
    const int N = static_cast<int>(u.size());
    double vmax = linf_norm(v);
    if (dt * vmax > 0.9 * dx * (1.0 + 1e-12)) throw std::runtime_error("CFL violation");

    // F[j]: flux through the left edge of cell j; ghost density is zero.
    std::vector<double> F(N + 1, 0.0);
    for (int j = 1; j < N; ++j) {
      double vh = 0.5 * (v[j - 1] + v[j]);
      F[j] = std::max(vh, 0.0) * u[j - 1] + std::min(vh, 0.0) * u[j];
    }
    F[0] = std::min(v[0], 0.0) * u[0];
    F[N] = std::max(v[N - 1], 0.0) * u[N - 1];

    out[i].resize(N);
    for (int j = 0; j < N; ++j) out[i][j] = u[j] - lam * (right_factor * F[j + 1] - F[j]);
  }
  return out;
}

}  // namespace

std::vector<Field> fv_step(const std::vector<Field>& rho, const VelocityField& vel, double dt,
                           double dx) {
  return fv_step_impl(rho, vel, dt, dx, 1.0);
}

std::vector<Field> fv_step_nonconservative(const std::vector<Field>& rho,
                                           const VelocityField& vel, double dt, double dx) {
  return fv_step_impl(rho, vel, dt, dx, 1.0 + 1e-3);
}

SpaceTimeSlab fv_solve(const std::vector<Field>& rho0,
                       const std::function<const Field&(int)>& r_at,
                       const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl,
                       const Grid1D& grid, double dt, int n_steps, bool store_velocity,
                       bool nonconservative_hook) {
  SpaceTimeSlab slab;
  slab.grid = grid;
  slab.times.resize(n_steps + 1);
  slab.rho.resize(n_steps + 1);
  slab.rho[0] = rho0;
  if (store_velocity) slab.velocity.resize(n_steps + 1);
  for (int m = 0; m < n_steps; ++m) {
    slab.times[m] = m * dt;
    VelocityField vel = assemble_velocity(slab.rho[m], r_at(m), kernels, v_nl, grid);
    slab.rho[m + 1] = nonconservative_hook
                          ? fv_step_nonconservative(slab.rho[m], vel, dt, grid.dx())
                          : fv_step(slab.rho[m], vel, dt, grid.dx());
    if (store_velocity) slab.velocity[m] = std::move(vel);
  }
  slab.times[n_steps] = n_steps * dt;
  if (store_velocity)
    slab.velocity[n_steps] =
        assemble_velocity(slab.rho[n_steps], r_at(n_steps), kernels, v_nl, grid);
  return slab;
}

// --- semi-Lagrangian characteristics ----------------------------------------

namespace {

double lerp_field(const Field& f, const Grid1D& g, double x, bool zero_outside) {
  const double dx = g.dx();
  double s = (x - g.x_min) / dx - 0.5;
  if (s <= 0.0) return zero_outside ? 0.0 : f.front();
  if (s >= g.n_cells - 1.0) return zero_outside ? 0.0 : f.back();
  int j = static_cast<int>(s);
  double t = s - j;
  return (1.0 - t) * f[j] + t * f[j + 1];
}

// Feet outside the grid translate rigidly with the edge offset; the far
// field carries no mass (checked at setup), so only continuity matters.
double lerp_foot(const Field& foot, const Grid1D& g, double x) {
  const double dx = g.dx();
  double s = (x - g.x_min) / dx - 0.5;
  if (s <= 0.0) return foot.front() + (x - g.center(0));
  if (s >= g.n_cells - 1.0) return foot.back() + (x - g.center(g.n_cells - 1));
  int j = static_cast<int>(s);
  double t = s - j;
  return (1.0 - t) * foot[j] + t * foot[j + 1];
}

}  // namespace

CharacteristicTrace trace_characteristic(const SpaceTimeSlab& slab, int class_index, double x,
                                         int subcycles) {
  if (slab.velocity.empty())
    throw std::invalid_argument("trace_characteristic: slab has no stored velocities");
  CharacteristicTrace tr;
  double y = x;
  double integral = 0.0;
  for (int m = slab.steps() - 2; m >= 0; --m) {
    const Field& v = slab.velocity[m].v[class_index];
    const Field& g = slab.velocity[m].dvdx[class_index];
    const double h = (slab.times[m + 1] - slab.times[m]) / subcycles;
    auto vv = [&](double p) { return lerp_field(v, slab.grid, p, false); };
    auto gg = [&](double p) { return lerp_field(g, slab.grid, p, false); };
    for (int c = 0; c < subcycles; ++c) {
      double g0 = gg(y);
      tr.dvdx_samples.push_back(g0);
      double k1 = vv(y);
      double k2 = vv(y - 0.5 * h * k1);
      double k3 = vv(y - 0.5 * h * k2);
      double k4 = vv(y - h * k3);
      y -= h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      integral += 0.5 * h * (g0 + gg(y));
    }
  }
  tr.foot = y;
  tr.jacobian = std::exp(-integral);
  return tr;
}

std::pair<SpaceTimeSlab, CharDiagnostics> characteristics_solve(
    const std::vector<Field>& rho0, const std::function<const Field&(int)>& r_at,
    const std::vector<Kernel>& kernels, const NonlocalSpeedLaw& v_nl, const Grid1D& grid,
    double dt, int n_steps, int subcycles) {
  const int N = grid.n_cells;
  const int k = static_cast<int>(rho0.size());
  const double dx = grid.dx();

  // padding check: mass of rho0 near the edges would be dragged outside
  const double reach = v_nl.sup_speed * dt * n_steps + 2 * dx;
  for (const Field& c : rho0) {
    double edge_mass = 0.0;
    for (int j = 0; j < N; ++j) {
      double x = grid.center(j);
      if (x - grid.x_min < reach || grid.x_max - x < reach) edge_mass += std::abs(c[j]) * dx;
    }
    if (edge_mass > 1e-14)
      throw std::runtime_error("characteristic trace exits grid (insufficient padding)");
  }

  SpaceTimeSlab slab;
  slab.grid = grid;
  slab.times.resize(n_steps + 1);
  slab.rho.resize(n_steps + 1);
  slab.rho[0] = rho0;

  CharDiagnostics diag;
  std::vector<Field> foot(k, Field(N)), efac(k, Field(N, 1.0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < N; ++j) foot[i][j] = grid.center(j);

  for (int m = 0; m < n_steps; ++m) {
    slab.times[m] = m * dt;
    VelocityField vel = assemble_velocity(slab.rho[m], r_at(m), kernels, v_nl, grid);
    for (int i = 0; i < k; ++i) diag.measured_Q = std::max(diag.measured_Q, linf_norm(vel.dvdx[i]));

    slab.rho[m + 1].assign(k, Field(N, 0.0));
    const double h = dt / subcycles;
    for (int i = 0; i < k; ++i) {
      const Field& v = vel.v[i];
      const Field& g = vel.dvdx[i];
      Field new_foot(N), new_efac(N);
      for (int j = 0; j < N; ++j) {
        // backward trace within [t_m, t_{m+1}], velocity frozen at t_m
        double y = grid.center(j);
        double integral = 0.0;
        auto vv = [&](double x) { return lerp_field(v, grid, x, false); };
        auto gg = [&](double x) { return lerp_field(g, grid, x, false); };
        for (int c = 0; c < subcycles; ++c) {
          double g0 = gg(y);
          double k1 = vv(y);
          double k2 = vv(y - 0.5 * h * k1);
          double k3 = vv(y - 0.5 * h * k2);
          double k4 = vv(y - h * k3);
          y -= h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
          integral += 0.5 * h * (g0 + gg(y));  // trapezoid along the trace
        }
        double e_inc = std::exp(-integral);
        new_foot[j] = lerp_foot(foot[i], grid, y);
        new_efac[j] = lerp_field(efac[i], grid, y, false) * e_inc;
        slab.rho[m + 1][i][j] = lerp_field(rho0[i], grid, new_foot[j], true) * new_efac[j];
        diag.max_abs_logE = std::max(diag.max_abs_logE, std::abs(std::log(new_efac[j])));
      }
      foot[i] = std::move(new_foot);
      efac[i] = std::move(new_efac);
    }
  }
  slab.times[n_steps] = n_steps * dt;
  diag.foot = foot[0];
  diag.efac = efac[0];
  return {std::move(slab), std::move(diag)};
}

}  // namespace nltraffic
