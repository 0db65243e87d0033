#include "nltraffic/local.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nltraffic {

double max_wave_speed(const LocalFlux& flux, double r_lo, double r_hi, int q_samples) {
  double sigma = 0.0;
  const int N = static_cast<int>(flux.coeff.size());
  for (int j = 0; j < N; ++j) {
    for (int s = 0; s <= q_samples; ++s) {
      double q = r_lo + (r_hi - r_lo) * s / q_samples;
      sigma = std::max(sigma, std::abs(flux.fprime(j, q)));
    }
  }
  return sigma;
}

double max_wave_speed(const LocalFlux& flux) {
  return max_wave_speed(flux, 0.0, flux.law->R_L);
}

namespace {

constexpr int kScanPoints = 48;
constexpr int kGoldenIters = 40;

// Demand D = max f_j over [0, r] and supply S = max f_j over [r, top],
// computed per cell from one scan of the positive part of f_j plus a
// golden-section polish around the scan maximum.
struct CellSplit {
  double demand;
  double supply;
  double speed;  // max |f'| seen at scan points, for the CFL check
};

CellSplit demand_supply(const LocalFlux& flux, int j, double r) {
  const double R_L = flux.law->R_L;
  const double c = flux.coeff[j];
  // f_j(s) = s * v_L(c + s) has its positive hump inside [0, R_L - c];
  // beyond it v_L <= 0. Scan a little past to be safe.
  double top = std::max(R_L - c, 0.0);
  CellSplit out{0.0, 0.0, 0.0};
  if (top <= 0.0) {  // cell is at or over capacity: nothing can enter or pass
    out.speed = std::abs(flux.fprime(j, std::max(r, 0.0)));
    return out;
  }
  double scan_hi = top * (1.0 + 1e-12);
  double best = 0.0, best_s = 0.0;
  double max_le = 0.0, max_ge = 0.0;  // scan maxima below / above r
  for (int i = 0; i <= kScanPoints; ++i) {
    double s = scan_hi * i / kScanPoints;
    double v = flux.f(j, s);
    out.speed = std::max(out.speed, std::abs(flux.fprime(j, s)));
    if (v > best) {
      best = v;
      best_s = s;
    }
    if (s <= r) max_le = std::max(max_le, v);
    if (s >= r) max_ge = std::max(max_ge, v);
  }
  // polish the hump top
  double h = scan_hi / kScanPoints;
  double lo = std::max(best_s - h, 0.0), hi = std::min(best_s + h, scan_hi);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = flux.f(j, x1), f2 = flux.f(j, x2);
  for (int it = 0; it < kGoldenIters; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = flux.f(j, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = flux.f(j, x1);
    }
  }
  double theta = 0.5 * (lo + hi);
  double cap = std::max(flux.f(j, theta), best);

  double fr = flux.f(j, std::clamp(r, 0.0, scan_hi));
  if (r >= 0.0 && r <= scan_hi) {
    max_le = std::max(max_le, fr);
    max_ge = std::max(max_ge, fr);
  }
  if (theta <= r) max_le = std::max(max_le, cap);
  if (theta >= r) max_ge = std::max(max_ge, cap);
  if (r > scan_hi) max_ge = 0.0;  // f <= 0 beyond the hump
  out.demand = std::max(max_le, 0.0);
  out.supply = std::max(max_ge, 0.0);
  return out;
}

Field step_with_fluxes(const Field& r, const LocalFlux& flux, double dt, double dx,
                       double right_flux_factor) {
  const int N = static_cast<int>(r.size());
  if (static_cast<int>(flux.coeff.size()) != N)
    throw std::invalid_argument("local_step: coefficient size mismatch");

  std::vector<CellSplit> split(N);
  double sigma = 0.0;
  for (int j = 0; j < N; ++j) {
    split[j] = demand_supply(flux, j, r[j]);
    sigma = std::max(sigma, split[j].speed);
  }
  if (dt * sigma > 0.9 * dx * (1.0 + 1e-12)) throw std::runtime_error("CFL violation");

  // F[j] is the flux through the left edge of cell j; F[N] the right edge.
  // Zero-gradient ghost cells: states constant up to the boundary stay
  // exact, and compactly supported data see zero boundary flux.
  std::vector<double> F(N + 1, 0.0);
  F[0] = std::min(split[0].demand, split[0].supply);
  for (int j = 0; j + 1 < N; ++j) F[j + 1] = std::min(split[j].demand, split[j + 1].supply);
  F[N] = std::min(split[N - 1].demand, split[N - 1].supply);

  Field out(N);
  const double lam = dt / dx;
  for (int j = 0; j < N; ++j) out[j] = r[j] - lam * (right_flux_factor * F[j + 1] - F[j]);
  return out;
}

}  // namespace

Field local_step(const Field& r, const LocalFlux& flux, double dt, double dx) {
  return step_with_fluxes(r, flux, dt, dx, 1.0);
}

Field local_step_nonconservative(const Field& r, const LocalFlux& flux, double dt, double dx) {
  return step_with_fluxes(r, flux, dt, dx, 1.0 + 1e-3);
}

// --- exact Riemann solution for x-independent flux --------------------------

double riemann_oracle(double r_l, double r_r, const LocalSpeedLaw& law, double t, double x) {
  if (r_l == r_r) return r_l;
  auto f = [&](double s) { return s * law.profile(s); };
  auto fp = [&](double s) { return law.profile(s) + s * law.d1(s); };
  auto fpp = [&](double s) { return 2.0 * law.d1(s) + s * law.d2(s); };

  const double lo = std::min(r_l, r_r), hi = std::max(r_l, r_r);
  bool concave = true, convex = true;
  const int M = 400;
  for (int i = 0; i <= M; ++i) {
    double s = lo + (hi - lo) * i / M;
    double c = fpp(s);
    if (c > 1e-10) concave = false;
    if (c < -1e-10) convex = false;
  }
  if (!concave && !convex) throw std::runtime_error("oracle limited to convex/concave flux");
  if (concave && convex) concave = true;  // affine flux: treat as contact

  if (t <= 0.0) return x < 0.0 ? r_l : r_r;
  const double xi = x / t;

  const bool shock = concave ? (r_l < r_r) : (r_l > r_r);
  if (shock || fpp(0.5 * (lo + hi)) == 0.0) {
    double sigma = (f(r_r) - f(r_l)) / (r_r - r_l);
    return xi < sigma ? r_l : r_r;
  }

  // rarefaction: f' is strictly monotone on [lo, hi]; invert by bisection
  double sl = fp(r_l), sr = fp(r_r);
  if (xi <= std::min(sl, sr)) return sl <= sr ? r_l : r_r;
  if (xi >= std::max(sl, sr)) return sl <= sr ? r_r : r_l;
  double a = lo, b = hi;
  // orient so fp(a) <= fp(b)
  bool increasing = fp(a) <= fp(b);
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if ((fp(m) < xi) == increasing)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace nltraffic
