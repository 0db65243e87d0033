#include "nltraffic/coupler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nltraffic {

double pair_norm_w11_l1(const State& a, const State& b) {
  const double dx = a.grid.dx();
  double d = 0.0;
  for (int i = 0; i < a.class_count(); ++i) {
    Field diff(a.rho[i].size());
    for (size_t j = 0; j < diff.size(); ++j) diff[j] = a.rho[i][j] - b.rho[i][j];
    d += w11_norm(diff, dx);
  }
  d += l1_distance(a.r, b.r, dx);
  return d;
}

double pair_norm_l1(const State& a, const State& b) {
  const double dx = a.grid.dx();
  double d = 0.0;
  for (int i = 0; i < a.class_count(); ++i) d += l1_distance(a.rho[i], b.rho[i], dx);
  d += l1_distance(a.r, b.r, dx);
  return d;
}

State slab_state(const SpaceTimeSlab& slab, int step, double t0_offset) {
  State s;
  s.grid = slab.grid;
  s.rho = slab.rho.at(step);
  s.r = slab.r.at(step);
  s.time = t0_offset + slab.times.at(step);
  return s;
}

namespace {

double local_speed_bound(const State& s, const LocalSpeedLaw& law) {
  LocalFlux flux{&law, s.sum_rho()};
  // allow the coefficient some growth within the window
  double sigma = max_wave_speed(flux, 0.0, law.R_L, 128);
  return sigma;
}

struct IterationSlabs {
  SpaceTimeSlab rho_slab;
  std::vector<Field> r_slab;
};

// One Picard pass: informed classes against the frozen local history, then
// the local class against the new informed slab.
IterationSlabs picard_pass(const State& s0, const std::vector<Field>& r_prev,
                           const BuiltModel& model, double dt, int n_steps,
                           bool nonconservative_hook) {
  IterationSlabs out;
  auto r_at = [&](int m) -> const Field& { return r_prev[m]; };
  out.rho_slab = fv_solve(s0.rho, r_at, model.kernels, model.v_nl, s0.grid, dt, n_steps, false,
                          nonconservative_hook);
  out.r_slab.resize(n_steps + 1);
  out.r_slab[0] = s0.r;
  for (int m = 0; m < n_steps; ++m) {
    LocalFlux flux{&model.v_l, out.rho_slab.sum_rho(m)};
    out.r_slab[m + 1] = nonconservative_hook
                            ? local_step_nonconservative(out.r_slab[m], flux, dt, s0.grid.dx())
                            : local_step(out.r_slab[m], flux, dt, s0.grid.dx());
  }
  return out;
}

}  // namespace

WindowResult solve_window(const State& state0, double window, const PicardConfig& config,
                          const BuiltModel& model) {
  if (window <= 0) throw std::invalid_argument("solve_window: window must be positive");
  if (state0.class_count() != static_cast<int>(model.kernels.size()))
    throw std::invalid_argument("solve_window: state/model class count mismatch");

  const double dx = state0.grid.dx();
  double speed = std::max({model.v_nl.sup_speed, local_speed_bound(state0, model.v_l), 1e-12});

  WindowResult res;
  res.entry.t0 = state0.time;
  res.entry.len = window;

  for (int halving = 0;; ++halving) {
    double dt_target = config.cfl_safety * dx / speed;
    int n_steps = std::max(1, static_cast<int>(std::ceil(window / dt_target)));
    double dt = window / n_steps;
    res.entry.dt_halvings = halving;

    try {
      std::vector<Field> r_prev(n_steps + 1, state0.r);  // seed: r frozen at r_o
      res.entry.residuals.clear();
      res.entry.iterations = 0;
      int stall_count = 0;

      for (int it = 1; it <= config.max_iter; ++it) {
        IterationSlabs cur = picard_pass(state0, r_prev, model, dt, n_steps,
                                         config.nonconservative_hook);
        double residual = 0.0;
        for (int m = 0; m <= n_steps; ++m)
          residual = std::max(residual, l1_distance(cur.r_slab[m], r_prev[m], dx));
        res.entry.residuals.push_back(residual);
        res.entry.iterations = it;

        if (res.entry.residuals.size() >= 2) {
          double prev = res.entry.residuals[res.entry.residuals.size() - 2];
          double ratio = prev > 0 ? residual / prev : 0.0;
          res.entry.observed_contraction = ratio;
          stall_count = (ratio > config.contraction_target) ? stall_count + 1 : 0;
        }

        if (residual <= config.tol) {
          res.slab = std::move(cur.rho_slab);
          res.slab.r = std::move(cur.r_slab);
          res.converged = true;
          return res;
        }
        if (stall_count >= 2) {
          res.converged = false;  // shrink window
          return res;
        }
        r_prev = std::move(cur.r_slab);
      }
      res.converged = false;  // max_iter hit
      return res;
    } catch (const std::runtime_error& e) {
      // a mid-window CFL violation means speeds grew past the initial
      // estimate; retry the whole window with a finer, deterministic dt
      if (std::string(e.what()) != "CFL violation" || halving >= 6) throw;
      speed *= 2.0;
    }
  }
}

namespace {

void boundary_mass_guard(const State& s, double remaining, double speed, double tol) {
  const double dx = s.grid.dx();
  double zone = speed * remaining + 2 * dx;
  double total = 0.0, near_edge = 0.0;
  auto tally = [&](const Field& f) {
    for (int j = 0; j < s.grid.n_cells; ++j) {
      double m = std::abs(f[j]) * dx;
      total += m;
      double x = s.grid.center(j);
      if (x - s.grid.x_min < zone || s.grid.x_max - x < zone) near_edge += m;
    }
  };
  for (const Field& c : s.rho) tally(c);
  tally(s.r);
  if (total > 0 && near_edge > tol * total) throw std::runtime_error("domain too small");
}

}  // namespace

EvolveResult evolve(const State& state0, double horizon, const PicardConfig& config,
                    const BuiltModel& model) {
  if (horizon < 0) throw std::invalid_argument("evolve: horizon must be nonnegative");
  auto t_start = std::chrono::steady_clock::now();

  EvolveResult out;
  out.final_state = state0;
  if (horizon == 0.0) {  // S_0 is the identity, exactly
    out.outputs.push_back(state0);
    return out;
  }

  double window = config.window;
  State state = state0;
  double t = 0.0;

  while (t < horizon - 1e-14) {
    double speed = std::max(model.v_nl.sup_speed, local_speed_bound(state, model.v_l));
    boundary_mass_guard(state, horizon - t, speed, config.boundary_mass_tol);
    double len = std::min(window, horizon - t);
    WindowResult w = solve_window(state, len, config, model);
    out.report.total_solves += 2L * w.entry.iterations;
    if (!w.converged) {
      window *= 0.5;
      if (window < config.min_window) {
        std::ostringstream msg;
        msg << "window underflow: no Picard contraction above min_window; residuals";
        for (double r : w.entry.residuals) msg << " " << r;
        throw std::runtime_error(msg.str());
      }
      continue;
    }
    out.report.windows.push_back(w.entry);
    if (config.output_stride > 0)
      for (int m = config.output_stride; m < w.slab.steps() - 1; m += config.output_stride)
        out.outputs.push_back(slab_state(w.slab, m, t));
    State end = slab_state(w.slab, w.slab.steps() - 1, t);
    out.outputs.push_back(end);
    if (config.keep_slabs) out.slabs.push_back(std::move(w.slab));
    state = std::move(end);
    t += len;
  }
  out.final_state = state;
  out.final_state.time = state0.time + horizon;
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

LipschitzProbe lipschitz_probe(const State& state0, const State& perturbed0, double horizon,
                               const PicardConfig& config, const BuiltModel& model) {
  LipschitzProbe probe;
  double d0 = pair_norm_w11_l1(state0, perturbed0);
  if (d0 == 0.0) {
    probe.degenerate = true;
    probe.times = {0.0};
    probe.alpha = {1.0};
    probe.alpha_l1 = {1.0};
    return probe;
  }
  double d0_l1 = pair_norm_l1(state0, perturbed0);

  EvolveResult a = evolve(state0, horizon, config, model);
  EvolveResult b = evolve(perturbed0, horizon, config, model);

  // compare at common output times (window halving keeps ends aligned)
  size_t ia = 0, ib = 0;
  while (ia < a.outputs.size() && ib < b.outputs.size()) {
    double ta = a.outputs[ia].time, tb = b.outputs[ib].time;
    if (std::abs(ta - tb) < 1e-12) {
      probe.times.push_back(ta);
      probe.alpha.push_back(pair_norm_w11_l1(a.outputs[ia], b.outputs[ib]) / d0);
      probe.alpha_l1.push_back(d0_l1 > 0
                                   ? pair_norm_l1(a.outputs[ia], b.outputs[ib]) / d0_l1
                                   : 0.0);
      ++ia;
      ++ib;
    } else if (ta < tb) {
      ++ia;
    } else {
      ++ib;
    }
  }
  for (size_t i = 0; i < probe.times.size(); ++i) {
    double t = probe.times[i] - state0.time;
    if (t > 1e-12) probe.fitted_C = std::max(probe.fitted_C, (probe.alpha[i] - 1.0) / t);
  }
  probe.fitted_C = std::max(probe.fitted_C, 0.0);
  return probe;
}

std::string PicardReport::to_json() const {
  nlohmann::json j;
  j["windows"] = nlohmann::json::array();
  for (const auto& w : windows) {
    nlohmann::json e;
    e["t0"] = w.t0;
    e["len"] = w.len;
    e["iters"] = w.iterations;
    e["residuals"] = w.residuals;
    e["contraction"] = w.observed_contraction;
    e["dt_halvings"] = w.dt_halvings;
    j["windows"].push_back(e);
  }
  j["total_solves"] = total_solves;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

}  // namespace nltraffic
