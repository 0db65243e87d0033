#include "nltraffic/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace nltraffic {

bool VerificationSummary::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::string VerificationSummary::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) {
    j.push_back({{"name", c.name},
                 {"pass", c.pass},
                 {"measured", c.measured},
                 {"tolerance", c.tolerance},
                 {"detail", c.detail}});
  }
  return j.dump(2);
}

std::string VerificationSummary::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << c.measured << " (tol "
        << c.tolerance << ")";
    if (!c.detail.empty()) out << "; " << c.detail;
    out << "\n";
  }
  return out.str();
}

std::vector<CheckResult> check_mass_conservation(const std::vector<State>& outputs,
                                                 const State& initial, bool r_equality) {
  std::vector<CheckResult> out;
  const double dx = initial.grid.dx();
  for (int i = 0; i < initial.class_count(); ++i) {
    CheckResult c;
    c.name = "mass conservation rho_" + std::to_string(i + 1);
    c.tolerance = 1e-12;
    double m0 = mass(initial.rho[i], dx);
    double worst = 0.0;
    for (const State& s : outputs)
      worst = std::max(worst, std::abs(mass(s.rho[i], dx) - m0) / std::max(std::abs(m0), 1e-300));
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    out.push_back(c);
  }
  {
    CheckResult c;
    c.name = r_equality ? "mass conservation r (equality)" : "mass bound r";
    c.tolerance = 1e-10;
    double m0 = mass(initial.r, dx);
    double worst = 0.0;
    for (const State& s : outputs) {
      double m = mass(s.r, dx);
      worst = std::max(worst, r_equality ? std::abs(m - m0) : (m - m0));
    }
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    out.push_back(c);
  }
  return out;
}

std::vector<CheckResult> check_invariance(const std::vector<State>& outputs, double R_L) {
  CheckResult rho_min{"positivity min rho", false, 0.0, 1e-12, ""};
  CheckResult r_low{"invariance min r", false, 0.0, 1e-12, ""};
  CheckResult r_high{"invariance max r - R_L", false, 0.0, 1e-12, ""};
  double worst_rho = 0.0, worst_rlow = 0.0, worst_rhigh = 0.0;
  for (const State& s : outputs) {
    for (const Field& c : s.rho)
      for (double v : c) worst_rho = std::min(worst_rho, v);
    for (double v : s.r) {
      worst_rlow = std::min(worst_rlow, v);
      worst_rhigh = std::max(worst_rhigh, v - R_L);
    }
  }
  rho_min.measured = worst_rho;
  rho_min.pass = worst_rho >= -1e-12;
  r_low.measured = worst_rlow;
  r_low.pass = worst_rlow >= -1e-12;
  r_high.measured = worst_rhigh;
  r_high.pass = worst_rhigh <= 1e-12;
  return {rho_min, r_low, r_high};
}

CheckResult check_semigroup(const State& s0, double t, const PicardConfig& cfg,
                            const BuiltModel& model, double reference_distance) {
  CheckResult c;
  c.name = "semigroup composition";
  c.tolerance = 2.0 * reference_distance;
  EvolveResult whole = evolve(s0, t, cfg, model);
  EvolveResult half = evolve(s0, 0.5 * t, cfg, model);
  EvolveResult chained = evolve(half.final_state, 0.5 * t, cfg, model);
  c.measured = pair_norm_l1(whole.final_state, chained.final_state);
  c.pass = c.measured <= c.tolerance;
  std::ostringstream d;
  d << "reference refinement distance " << reference_distance;
  c.detail = d.str();
  return c;
}

CheckResult check_half_tv(int cases, unsigned long seed) {
  CheckResult c;
  c.name = "half-TV inequality";
  c.tolerance = 1e-12;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_jumps(1, 25), n_len(16, 200);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  double worst = -1e300;
  for (int k = 0; k < cases; ++k) {
    int N = n_len(rng);
    Field f(N, 0.0);
    int jumps = n_jumps(rng);
    for (int q = 0; q < jumps; ++q) {
      int a = std::uniform_int_distribution<int>(0, N - 1)(rng);
      int b = std::uniform_int_distribution<int>(0, N - 1)(rng);
      if (a > b) std::swap(a, b);
      double v = val(rng);
      for (int j = a; j <= b; ++j) f[j] += v;
    }
    worst = std::max(worst, linf_norm(f) - 0.5 * tv(f));
    if (worst > 1e-12) break;
  }
  c.measured = worst;
  c.pass = worst <= 1e-12;
  return c;
}

CheckResult check_tv_growth(const std::vector<SpaceTimeSlab>& slabs, const LocalSpeedLaw& law) {
  CheckResult c;
  c.name = "TV growth bound";
  c.tolerance = 2.0;  // asserted with a factor-2 slack on the measured bound

  // global derivative bounds of the law over the sampled argument range
  double d1max = 0.0, d2max = 0.0, coeff_max = 0.0;
  for (const auto& slab : slabs)
    for (int m = 0; m < slab.steps(); ++m) coeff_max = std::max(coeff_max, linf_norm(slab.sum_rho(m)));
  for (int i = 0; i <= 4000; ++i) {
    double q = -1.0 + (law.R_L + coeff_max + 2.0) * i / 4000.0;
    d1max = std::max(d1max, std::abs(law.d1(q)));
    d2max = std::max(d2max, std::abs(law.d2(q)));
  }
  const double R = law.R_L + coeff_max;

  double worst_ratio = 0.0;
  double t = 0.0, source = 0.0;
  double tv0 = -1.0, kappa = 0.0;
  std::ostringstream detail;
  for (const auto& slab : slabs) {
    const double dx = slab.grid.dx();
    if (tv0 < 0) tv0 = tv(slab.r.front());
    for (int m = 0; m + 1 < slab.steps(); ++m) {
      double dt = slab.times[m + 1] - slab.times[m];
      Field sum = slab.sum_rho(m);
      Field d1f = forward_diff(sum, dx);
      double dsum_inf = linf_norm(d1f);
      double dsum_l1 = l1_norm(d1f, dx);
      double d2sum_l1 = l1_norm(forward_diff(d1f, dx), dx);
      // kappa_hat = 3(||dx w||_inf + R ||d2xr w||_inf), both bounded through
      // the measured slab gradient
      kappa = std::max(kappa, 3.0 * (d1max * dsum_inf + R * d2max * dsum_inf));
      // interior integral of ||d2xx w(t, x, .)||_inf dx
      double sxx = d2max * dsum_inf * dsum_l1 + d1max * d2sum_l1;
      source = source * std::exp(kappa * dt) + R * sxx * dt * std::exp(kappa * dt);
      t += dt;
      double bound = tv0 * std::exp(kappa * t) + source;
      double measured_tv = tv(slab.r[m + 1]);
      if (bound > 0) worst_ratio = std::max(worst_ratio, measured_tv / bound);
    }
  }
  detail << "kappa_hat " << kappa << ", TV(r_o) " << tv0 << ", horizon " << t;
  c.detail = detail.str();
  c.measured = worst_ratio;
  c.pass = worst_ratio <= c.tolerance;
  return c;
}

CheckResult check_jacobian_bound(const CharDiagnostics& diag, double t) {
  CheckResult c;
  c.name = "characteristic Jacobian bound";
  c.tolerance = diag.measured_Q * t + 0.1;
  c.measured = diag.max_abs_logE;
  c.pass = c.measured <= c.tolerance;
  std::ostringstream d;
  d << "measured sup|dv/dx| " << diag.measured_Q;
  c.detail = d.str();
  return c;
}

namespace {
double rho_l1(const std::vector<Field>& rho, double dx) {
  double s = 0.0;
  for (const Field& c : rho) s += l1_norm(c, dx);
  return s;
}

double cross_solver_distance(const BuiltModel& model, const State& s0, double horizon,
                             CharDiagnostics* diag_out) {
  const double dx = s0.grid.dx();
  double speed = std::max(model.v_nl.sup_speed, 1e-12);
  int n_steps = std::max(1, static_cast<int>(std::ceil(horizon / (0.45 * dx / speed))));
  double dt = horizon / n_steps;
  auto r_at = [&](int) -> const Field& { return s0.r; };
  SpaceTimeSlab fv = fv_solve(s0.rho, r_at, model.kernels, model.v_nl, s0.grid, dt, n_steps);
  auto [ch, diag] =
      characteristics_solve(s0.rho, r_at, model.kernels, model.v_nl, s0.grid, dt, n_steps);
  if (diag_out) *diag_out = std::move(diag);
  double d = 0.0;
  for (int i = 0; i < s0.class_count(); ++i)
    d += l1_distance(fv.rho.back()[i], ch.rho.back()[i], dx);
  return d;
}
}  // namespace

CrossSolverResult check_cross_solver(const BuiltModel& model, const State& s0, double horizon,
                                     double frac) {
  CrossSolverResult out;
  out.check.name = "cross-solver agreement (FV vs characteristics)";
  const double dx = s0.grid.dx();
  out.check.tolerance = frac * rho_l1(s0.rho, dx);
  out.distance_coarse = cross_solver_distance(model, s0, horizon, &out.diag_coarse);

  // refined copy of the same instance
  Grid1D fine(s0.grid.x_min, s0.grid.x_max, 2 * s0.grid.n_cells);
  State sf = make_state(fine, s0.class_count());
  for (int i = 0; i < s0.class_count(); ++i)
    for (int j = 0; j < fine.n_cells; ++j) sf.rho[i][j] = s0.rho[i][j / 2];
  for (int j = 0; j < fine.n_cells; ++j) sf.r[j] = s0.r[j / 2];
  out.distance_fine = cross_solver_distance(model, sf, horizon, nullptr);

  out.check.measured = out.distance_coarse;
  bool shrinks = out.distance_fine <= out.distance_coarse / 1.5;
  out.check.pass = out.distance_coarse <= out.check.tolerance && shrinks;
  std::ostringstream d;
  d << "coarse " << out.distance_coarse << ", refined " << out.distance_fine << " (need ratio >= 1.5)";
  out.check.detail = d.str();
  return out;
}

CheckResult check_lipschitz(const LipschitzProbe& probe, double c_cap) {
  CheckResult c;
  c.name = "Lipschitz probe";
  c.tolerance = c_cap;
  c.measured = probe.fitted_C;
  c.pass = !probe.degenerate && std::isfinite(probe.fitted_C) && probe.fitted_C <= c_cap;
  std::ostringstream d;
  d << "alpha(t) <= 1 + C t with fitted C = " << probe.fitted_C;
  c.detail = d.str();
  return c;
}

CheckResult check_determinism(const State& s0, double horizon, const PicardConfig& cfg,
                              const BuiltModel& model) {
  CheckResult c;
  c.name = "determinism (bit-identical output)";
  c.tolerance = 0.0;
  auto run = [&]() {
    EvolveResult r = evolve(s0, horizon, cfg, model);
    std::ostringstream buf;
    write_state_csv(r.final_state, buf);
    return buf.str();
  };
  std::string a = run(), b = run();
  c.measured = (a == b) ? 0.0 : 1.0;
  c.pass = a == b;
  return c;
}

}  // namespace nltraffic
