#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>
#include <cmath>

#include "doctest.h"
#include "nltraffic/grid.hpp"
#include "nltraffic/model.hpp"

using namespace nltraffic;

namespace {

// Independent quadrature oracle: (f * zeta_n)(x) by fine Simpson integration
// of the closed-form field, not through the grid machinery under test.
double mollify_oracle_indicator(double x, int n) {
  // integrand zeta_n(x - y) over y in [0, 1]
  const int M = 4000;
  double lo = std::max(0.0, x - 1.0 / n), hi = std::min(1.0, x + 1.0 / n);
  if (hi <= lo) return 0.0;
  double h = (hi - lo) / M;
  double s = 0.0;
  for (int i = 0; i <= M; ++i) {
    double y = lo + i * h;
    double w = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * n * mollifier_bump(n * (x - y));
  }
  return s * h / 3.0;
}

Field indicator01(const Grid1D& g) {
  Field f(g.n_cells, 0.0);
  for (int j = 0; j < g.n_cells; ++j)
    if (g.center(j) >= 0.0 && g.center(j) <= 1.0) f[j] = 1.0;
  return f;
}

}  // namespace

TEST_CASE("mollifier bump is a unit-mass bump supported on [-1,1]") {
  CHECK(mollifier_bump(1.0) == 0.0);
  CHECK(mollifier_bump(-1.2) == 0.0);
  CHECK(mollifier_bump(0.0) > 0.0);
  // fine Simpson integral of the normalized bump
  const int M = 20000;
  double s = 0.0, h = 2.0 / M;
  for (int i = 0; i <= M; ++i) {
    double w = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * mollifier_bump(-1.0 + i * h);
  }
  CHECK(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mollify: trivial and derived cases") {
  Grid1D g(-2.0, 3.0, 1000);

  SUBCASE("zero field stays zero") {
    Field out = mollify(Field(g.n_cells, 0.0), g, 4);
    CHECK(linf_norm(out) == 0.0);
  }

  SUBCASE("constant plateau is reproduced away from its edges") {
    Field f(g.n_cells, 2.5);
    Field out = mollify(f, g, 4);
    // interior cells further than 1/4 from the grid edge
    for (int j = 0; j < g.n_cells; ++j) {
      double x = g.center(j);
      if (x > g.x_min + 0.3 && x < g.x_max - 0.3)
        CHECK(out[j] == doctest::Approx(2.5).epsilon(1e-12));
    }
  }

  SUBCASE("indicator of [0,1], n = 8: mass preserved, profile matches quadrature oracle") {
    Field f = indicator01(g);
    Field out = mollify(f, g, 8);
    CHECK(std::abs(l1_norm(out, g.dx()) - l1_norm(f, g.dx())) < 1e-10);
    // oracle comparison at a handful of probe points incl. the smoothed edges
    for (double x : {-0.2, -0.05, 0.0, 0.06, 0.5, 0.94, 1.0, 1.1}) {
      int j = g.nearest_cell(x);
      double ref = mollify_oracle_indicator(g.center(j), 8);
      CHECK(out[j] == doctest::Approx(ref).epsilon(5e-3));
    }
    // smoothing cannot raise the L1 norm, and the derivative mass is
    // bounded by the variation of the indicator
    CHECK(l1_norm(out, g.dx()) <= l1_norm(f, g.dx()) + 1e-12);
    double w11 = w11_norm(out, g.dx());
    CHECK(std::isfinite(w11));
    CHECK(w11 <= 1.0 + tv(f) + 1e-10);
  }

  SUBCASE("under-resolved mollifier is rejected") {
    Grid1D coarse(-2.0, 3.0, 50);
    CHECK_THROWS_WITH(mollify(Field(coarse.n_cells, 1.0), coarse, 40),
                      "under-resolved mollifier");
  }
}

TEST_CASE("mollify is linear and converges to the identity as n grows") {
  Grid1D g(-2.0, 3.0, 2000);
  Field f = indicator01(g);
  Field h(g.n_cells);
  for (int j = 0; j < g.n_cells; ++j) h[j] = std::sin(0.01 * j);

  SUBCASE("linearity to 1e-12 relative") {
    const double a = 1.7, b = -0.4;
    Field combo(g.n_cells);
    for (int j = 0; j < g.n_cells; ++j) combo[j] = a * f[j] + b * h[j];
    Field lhs = mollify(combo, g, 8);
    Field mf = mollify(f, g, 8), mh = mollify(h, g, 8);
    double scale = linf_norm(lhs) + 1.0;
    for (int j = 0; j < g.n_cells; ++j)
      CHECK(std::abs(lhs[j] - (a * mf[j] + b * mh[j])) < 1e-12 * scale);
  }

  SUBCASE("L1 error decreases in n until the resolution floor") {
    double prev = 1e300;
    for (int n : {4, 8, 16, 32}) {
      double err = l1_distance(mollify(f, g, n), f, g.dx());
      CHECK(err < prev);
      prev = err;
    }
  }
}

TEST_CASE("built-in kernels") {
  SUBCASE("gaussian integrates to 1 within 1e-10 (fine quadrature)") {
    Kernel k = gaussian_kernel(0.5);
    const int M = 200000;
    double h = (k.support_fwd + k.support_back) / M;
    double s = 0.0;
    for (int i = 0; i <= M; ++i) {
      double w = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * k.evaluate(-k.support_back + i * h);
    }
    CHECK(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(k.support_fwd == doctest::Approx(3.0));  // 6 sigma
    CHECK(k.tail_mass < 1e-8);
  }

  SUBCASE("forward-exponential has a one-sided window") {
    Kernel k = forward_exponential_kernel(1.0);
    CHECK(k.support_back == 0.0);
    CHECK(k.support_fwd > 0.0);
    CHECK(k.evaluate(-0.3) == 0.0);
    CHECK(k.evaluate(1.0) > 0.0);
  }
}

TEST_CASE("built-in local speed laws") {
  SUBCASE("cutoff identities hold exactly") {
    for (const LocalSpeedLaw& law :
         {greenshields_law(1.0, 1.0, 0.1), greenshields_law(2.0, 1.5, 0.2), example1_local_law()}) {
      CHECK(law.profile(-1.0) == law.V_L);
      CHECK(law.profile(law.R_L + 1.0) == 0.0);
      CHECK(law.profile(0.0) == law.V_L);
    }
  }

  SUBCASE("example1 law equals 1 - r on [1/2, 1]") {
    LocalSpeedLaw law = example1_local_law();
    for (double r : {0.5, 0.6, 0.75, 0.9, 0.999, 1.0}) {
      CHECK(law.profile(r) == doctest::Approx(1.0 - r).epsilon(1e-15));
      CHECK(law.d1(r) == doctest::Approx(-1.0).epsilon(1e-15));
    }
    CHECK(law.R_L > 1.0);  // C^2 continuation past the zero of the line
  }
}

TEST_CASE("validate_hypotheses") {
  SUBCASE("all built-ins pass") {
    for (const char* name : {"gaussian-greenshields", "forward-exponential", "example1"}) {
      BuiltModel m = builtin_model(name, "{}");
      ValidationReport rep = validate_hypotheses(m.kernels, m.v_nl, m.v_l, 200);
      INFO(name, ":\n", rep.summary());
      CHECK(rep.all_pass());
    }
  }

  SUBCASE("jump in the local profile fails the C2 screen") {
    BuiltModel m = builtin_model("gaussian-greenshields", "{}");
    LocalSpeedLaw broken = m.v_l;
    LocalSpeedLaw clean = m.v_l;
    double rj = m.v_l.R_L / 2.0;
    broken.profile = [clean, rj](double q) {
      return clean.profile(q) + (q > rj ? 0.3 : 0.0);
    };
    ValidationReport rep = validate_hypotheses(m.kernels, m.v_nl, broken, 200);
    bool c2_failed = false;
    for (const auto& c : rep.checks)
      if (c.name == "(vL) C2 consistency" && !c.pass) c2_failed = true;
    CHECK(c2_failed);
  }

  SUBCASE("gaussian window is reported") {
    BuiltModel m = builtin_model("gaussian-greenshields", R"({"sigma": 0.5})");
    ValidationReport rep = validate_hypotheses(m.kernels, m.v_nl, m.v_l, 150);
    CHECK(rep.all_pass());
    bool found = false;
    for (const auto& c : rep.checks)
      if (c.name.find("support window") != std::string::npos)
        found = c.detail.find("[-3, 3]") != std::string::npos;
    CHECK(found);
  }

  SUBCASE("deterministic under a fixed seed") {
    BuiltModel m = builtin_model("gaussian-greenshields", "{}");
    ValidationReport a = validate_hypotheses(m.kernels, m.v_nl, m.v_l, 150, 777);
    ValidationReport b = validate_hypotheses(m.kernels, m.v_nl, m.v_l, 150, 777);
    REQUIRE(a.checks.size() == b.checks.size());
    for (size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].pass == b.checks[i].pass);
      CHECK(a.checks[i].worst_value == b.checks[i].worst_value);
    }
    CHECK_THROWS(validate_hypotheses(m.kernels, m.v_nl, m.v_l, 50));  // sample_count < 100
  }
}

TEST_CASE("builtin_model surface") {
  SUBCASE("example1 has identically zero informed speed law") {
    BuiltModel m = builtin_model("example1", "{}");
    REQUIRE(m.v_nl.class_count() == 1);
    for (double q : {-1.0, 0.0, 0.5, 2.0}) CHECK(m.v_nl.components[0].f(q) == 0.0);
    CHECK(m.v_nl.sup_speed == 0.0);
  }

  SUBCASE("unknown name is rejected") {
    CHECK_THROWS(builtin_model("no-such-model", "{}"));
  }

  SUBCASE("per-class parameters") {
    BuiltModel m = builtin_model("gaussian-greenshields", R"({"k": 2, "sigma": [0.3, 0.7]})");
    REQUIRE(m.kernels.size() == 2);
    CHECK(m.kernels[0].support_fwd == doctest::Approx(1.8));
    CHECK(m.kernels[1].support_fwd == doctest::Approx(4.2));
  }
}

TEST_CASE("model descriptor JSON") {
  SUBCASE("mixed per-class descriptor assembles and validates") {
    BuiltModel m = model_from_descriptor(R"({
      "kernel": [{"family": "gaussian", "sigma": 0.4},
                 {"family": "forward-exponential", "lambda": 2.0}],
      "v_nl": [{"family": "tanh", "v_max": 1.0, "q0": 0.5, "width": 0.25},
               {"family": "constant", "value": 0.3}],
      "v_l": {"family": "greenshields", "V_L": 1.0, "R_L": 1.0}
    })");
    REQUIRE(m.kernels.size() == 2);
    CHECK(m.kernels[1].support_back == 0.0);
    CHECK(m.v_nl.components[1].f(5.0) == 0.3);
    ValidationReport rep = validate_hypotheses(m.kernels, m.v_nl, m.v_l, 150);
    INFO(rep.summary());
    CHECK(rep.all_pass());
  }

  SUBCASE("missing pieces and unknown families are rejected") {
    CHECK_THROWS((void)model_from_descriptor(R"({"kernel": {"family": "gaussian"}})"));
    CHECK_THROWS((void)model_from_descriptor(R"({
      "kernel": {"family": "sinc"}, "v_nl": {"family": "zero"}, "v_l": {"family": "example1"}
    })"));
  }
}

TEST_CASE("example 2.4 data on an aligned grid") {
  // kinks on cell centers: dx = 1/(8n), centers on the dx lattice
  int n = 8;
  double dx = 1.0 / (8 * n);
  Grid1D g(-2.0 - dx / 2, 3.0 - dx / 2, 320);
  InitialDatum d = example1_datum(g, n);
  CHECK(l1_norm(d.rho0[0], g.dx()) == doctest::Approx(1.0 / n).epsilon(2 * g.dx()));
  // r + rho sums to exactly 1 on [0, 1]
  for (int j = 0; j < g.n_cells; ++j) {
    double x = g.center(j);
    if (x >= 0.0 && x <= 1.0) CHECK(d.rho0[0][j] + d.r0[j] == 1.0);
  }
  CHECK_THROWS(example1_datum(g, 100));  // under-resolved

  SUBCASE("physical-regime validation") {
    CHECK_NOTHROW(d.validate(1.1));
    InitialDatum bad = d;
    bad.r0[5] = 1.5;
    CHECK_THROWS(bad.validate(1.1));
    bad = d;
    bad.rho0[0][5] = -0.1;
    CHECK_THROWS(bad.validate(1.1));
    bad.physical = false;  // out of the physical regime: only finiteness
    CHECK_NOTHROW(bad.validate(1.1));
    bad.rho0[0][6] = std::numeric_limits<double>::infinity();
    CHECK_THROWS(bad.validate(1.1));
  }
}
