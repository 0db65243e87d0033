#include <benchmark/benchmark.h>

#include "nltraffic/config.hpp"
#include "nltraffic/coupler.hpp"
#include "nltraffic/local.hpp"
#include "nltraffic/model.hpp"
#include "nltraffic/nonlocal.hpp"

using namespace nltraffic;

namespace {

BuiltModel bench_model() {
  static BuiltModel m = builtin_model(
      "gaussian-greenshields",
      R"({"k":2, "sigma":[0.4,0.6], "v_max":[1.0,0.8], "q0":[0.5,0.6], "width":[0.25,0.3]})");
  return m;
}

State bench_state(int n_cells) {
  Grid1D g(-4.0, 6.0, n_cells);
  State s = make_state(g, 2);
  s.rho[0] = bump_field(g, 0.15, 0.0, 0.8);
  s.rho[1] = bump_field(g, 0.10, 1.0, 0.6);
  s.r = bump_field(g, 0.30, -1.0, 1.0);
  return s;
}

}  // namespace

static void BM_Convolve(benchmark::State& state) {
  BuiltModel m = bench_model();
  Grid1D g(-4.0, 6.0, state.range(0));
  Field f = bump_field(g, 0.4, 0.0, 1.0);
  for (auto _ : state) {
    Field out = convolve(f, m.kernels[0], g);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Convolve)->RangeMultiplier(2)->Range(200, 3200)->Complexity();

static void BM_AssembleVelocity(benchmark::State& state) {
  BuiltModel m = bench_model();
  State s = bench_state(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    VelocityField v = assemble_velocity(s.rho, s.r, m.kernels, m.v_nl, s.grid);
    benchmark::DoNotOptimize(v.v.data());
  }
}
BENCHMARK(BM_AssembleVelocity)->Arg(400)->Arg(800)->Arg(1600);

static void BM_FvStep(benchmark::State& state) {
  BuiltModel m = bench_model();
  State s = bench_state(static_cast<int>(state.range(0)));
  VelocityField v = assemble_velocity(s.rho, s.r, m.kernels, m.v_nl, s.grid);
  double dt = 0.45 * s.grid.dx() / m.v_nl.sup_speed;
  for (auto _ : state) {
    auto out = fv_step(s.rho, v, dt, s.grid.dx());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FvStep)->Arg(800)->Arg(1600);

static void BM_LocalStep(benchmark::State& state) {
  BuiltModel m = bench_model();
  State s = bench_state(static_cast<int>(state.range(0)));
  LocalFlux flux{&m.v_l, s.sum_rho()};
  double dt = 0.45 * s.grid.dx() / std::max(1.0, max_wave_speed(flux));
  for (auto _ : state) {
    Field out = local_step(s.r, flux, dt, s.grid.dx());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_LocalStep)->Arg(800)->Arg(1600);

static void BM_Mollify(benchmark::State& state) {
  Grid1D g(-4.0, 6.0, 1600);
  Field f = bump_field(g, 0.4, 0.0, 1.0);
  for (auto _ : state) {
    Field out = mollify(f, g, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Mollify)->Arg(4)->Arg(16)->Arg(64);

static void BM_SolveWindow(benchmark::State& state) {
  BuiltModel m = bench_model();
  State s = bench_state(static_cast<int>(state.range(0)));
  PicardConfig cfg;
  cfg.window = 0.1;
  for (auto _ : state) {
    WindowResult w = solve_window(s, 0.1, cfg, m);
    benchmark::DoNotOptimize(w.slab.rho.data());
  }
}
BENCHMARK(BM_SolveWindow)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
