#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nltraffic/grid.hpp"

using namespace nltraffic;

namespace {

Field indicator(const Grid1D& g, double a, double b) {
  Field f(g.n_cells, 0.0);
  for (int j = 0; j < g.n_cells; ++j) {
    double x = g.center(j);
    if (x >= a && x <= b) f[j] = 1.0;
  }
  return f;
}

Field random_piecewise(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(16, 250), jumps(1, 20);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  Field f(len(rng), 0.0);
  int J = jumps(rng);
  for (int q = 0; q < J; ++q) {
    int a = std::uniform_int_distribution<int>(0, (int)f.size() - 1)(rng);
    int b = std::uniform_int_distribution<int>(0, (int)f.size() - 1)(rng);
    if (a > b) std::swap(a, b);
    double v = val(rng);
    for (int j = a; j <= b; ++j) f[j] += v;
  }
  return f;
}

}  // namespace

TEST_CASE("grid construction and invariants") {
  CHECK_THROWS(Grid1D(0.0, 1.0, 4));   // fewer than 8 cells
  CHECK_THROWS(Grid1D(1.0, 0.0, 16));  // inverted bounds
  Grid1D g(-2.0, 3.0, 500);
  CHECK(g.dx() == doctest::Approx(0.01));
  CHECK(g.center(0) == doctest::Approx(-1.995));
}

TEST_CASE("basic norms on named fields") {
  Grid1D g(-2.0, 3.0, 500);

  SUBCASE("zero field has all norms zero") {
    Field z(g.n_cells, 0.0);
    NormReport n = norm_report(z, g.dx());
    CHECK(n.l1 == 0.0);
    CHECK(n.linf == 0.0);
    CHECK(n.tv == 0.0);
    CHECK(n.w11 == 0.0);
    CHECK(n.cbv1 == 0.0);
  }

  SUBCASE("indicator of [0,1]: tv = 2 (two unit jumps)") {
    Field f = indicator(g, 0.0, 1.0);
    CHECK(tv(f) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("hat of the stationary example, n = 4: l1 = 1/4") {
    // triangle of height 1 and base 2/n
    int n = 4;
    Field f(g.n_cells, 0.0);
    for (int j = 0; j < g.n_cells; ++j) {
      double x = g.center(j);
      if (x >= 1.0 - 1.0 / n && x <= 1.0)
        f[j] = 1.0 + n * (x - 1.0);
      else if (x > 1.0 && x <= 1.0 + 1.0 / n)
        f[j] = 1.0 - n * (x - 1.0);
    }
    CHECK(l1_norm(f, g.dx()) == doctest::Approx(0.25).epsilon(g.dx()));
  }
}

TEST_CASE("w11 and cbv1 on the ramp") {
  // ramp x on [0,1], zero to the left, grid ending at x = 1: the hand
  // integrals are int|u| = 1/2 and int|u'| = 1, and the derivative is an
  // indicator of height 1 whose tv (with boundary terms) is 2.
  Grid1D g(-2.0, 1.0, 600);
  Field f(g.n_cells, 0.0);
  for (int j = 0; j < g.n_cells; ++j) {
    double x = g.center(j);
    if (x >= 0.0) f[j] = x;
  }
  CHECK(w11_norm(f, g.dx()) == doctest::Approx(1.5).epsilon(2 * g.dx()));
  CHECK(cbv1_norm(f, g.dx()) == doctest::Approx(3.5).epsilon(2 * g.dx()));

  SUBCASE("zero field") {
    Field z(g.n_cells, 0.0);
    CHECK(w11_norm(z, g.dx()) == 0.0);
    CHECK(cbv1_norm(z, g.dx()) == 0.0);
  }
}

TEST_CASE("norm report ordering invariants") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    Field f = random_piecewise(rng);
    NormReport n = norm_report(f, 0.01);
    CHECK(n.w11 >= n.l1 - 1e-15);
    CHECK(n.cbv1 >= n.w11 - 1e-15);
    CHECK(n.l1 >= 0.0);
  }
}

TEST_CASE("half-TV bound: property over randomized fields") {
  // |q|_inf <= tv(q)/2 for every zero-extended field; 1e4 cases
  std::mt19937_64 rng(12345);
  for (int k = 0; k < 10000; ++k) {
    Field f = random_piecewise(rng);
    CHECK(half_tv_bound_check(f));
  }
  CHECK(half_tv_bound_check(Field(32, 0.0)));
  Grid1D g(-2.0, 3.0, 500);
  CHECK(half_tv_bound_check(indicator(g, 0.0, 1.0)));  // equality case: 1 <= 2/2
}

TEST_CASE("norms are absolutely homogeneous and satisfy the triangle inequality") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  for (int k = 0; k < 200; ++k) {
    Field f = random_piecewise(rng);
    Field h(f.size());
    for (auto& v : h) v = scale(rng);
    double c = scale(rng);
    Field cf(f.size());
    for (size_t j = 0; j < f.size(); ++j) cf[j] = c * f[j];
    Field fg(f.size());
    for (size_t j = 0; j < f.size(); ++j) fg[j] = f[j] + h[j];

    auto norms = [&](const Field& u) {
      NormReport n = norm_report(u, 0.01);
      return std::vector<double>{n.l1, n.linf, n.tv, n.w11, n.cbv1};
    };
    auto nf = norms(f), nh = norms(h), ncf = norms(cf), nfg = norms(fg);
    for (size_t i = 0; i < nf.size(); ++i) {
      CHECK(ncf[i] == doctest::Approx(std::abs(c) * nf[i]).epsilon(1e-12));
      CHECK(nfg[i] <= nf[i] + nh[i] + 1e-12 * (1 + nf[i] + nh[i]));
    }
  }
}

TEST_CASE("state CSV round trip") {
  Grid1D g(-1.0, 1.0, 64);
  State s = make_state(g, 2);
  for (int j = 0; j < g.n_cells; ++j) {
    s.rho[0][j] = std::sin(0.1 * j) * 1e-3;
    s.rho[1][j] = std::cos(0.2 * j);
    s.r[j] = 1.0 / (1.0 + j);
  }
  s.time = 0.6251;
  std::ostringstream out;
  write_state_csv(s, out);
  std::istringstream in(out.str());
  State t = read_state_csv(in);
  CHECK(t.grid == s.grid);
  CHECK(t.time == s.time);
  REQUIRE(t.class_count() == 2);
  for (int j = 0; j < g.n_cells; ++j) {
    CHECK(t.rho[0][j] == s.rho[0][j]);  // %.17g is lossless for doubles
    CHECK(t.rho[1][j] == s.rho[1][j]);
    CHECK(t.r[j] == s.r[j]);
  }
}
