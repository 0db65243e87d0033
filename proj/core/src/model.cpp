#include "nltraffic/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nltraffic {

namespace {

// --- quintic Hermite join with zero end curvatures ------------------------

// Basis with H(0)=p0, H'(0)=m0, H(1)=p1, H'(1)=m1 and zero second
// derivatives at both ends, so pieces glue to C^2 against flat or linear
// neighbors.
struct QuinticJoin {
  double a, b, p0, m0, p1, m1;
  double w() const { return b - a; }

  double value(double x) const {
    double t = (x - a) / w();
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    double H00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    double H10 = t - 6 * t3 + 8 * t4 - 3 * t5;
    double H01 = 10 * t3 - 15 * t4 + 6 * t5;
    double H11 = -4 * t3 + 7 * t4 - 3 * t5;
    return p0 * H00 + w() * m0 * H10 + p1 * H01 + w() * m1 * H11;
  }
  double d1(double x) const {
    double t = (x - a) / w();
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    double H00 = -30 * t2 + 60 * t3 - 30 * t4;
    double H10 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    double H11 = -12 * t2 + 28 * t3 - 15 * t4;
    return (p0 * H00 + w() * m0 * H10 - p1 * H00 + w() * m1 * H11) / w();
  }
  double d2(double x) const {
    double t = (x - a) / w();
    double t2 = t * t, t3 = t2 * t;
    double H00 = -60 * t + 180 * t2 - 120 * t3;
    double H10 = -36 * t + 96 * t2 - 60 * t3;
    double H11 = -24 * t + 84 * t2 - 60 * t3;
    return (p0 * H00 + w() * m0 * H10 - p1 * H00 + w() * m1 * H11) / (w() * w());
  }
  double d3(double x) const {
    double t = (x - a) / w();
    double t2 = t * t;
    double H00 = -60 + 360 * t - 360 * t2;
    double H10 = -36 + 192 * t - 180 * t2;
    double H11 = -24 + 168 * t - 180 * t2;
    return (p0 * H00 + w() * m0 * H10 - p1 * H00 + w() * m1 * H11) / (w() * w() * w());
  }
};

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// C^3 smoothstep: 0 below 0, 1 above 1, three vanishing derivatives at ends.
double sstep3(double y) {
  if (y <= 0) return 0.0;
  if (y >= 1) return 1.0;
  double y4 = y * y * y * y;
  return y4 * (35 - 84 * y + 70 * y * y - 20 * y * y * y);
}

}  // namespace

// --- mollifier -------------------------------------------------------------

namespace {
double raw_bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}
double bump_norm_constant() {
  static const double c = simpson([](double x) { return raw_bump(x); }, -1.0, 1.0, 20000);
  return c;
}
}  // namespace

double mollifier_bump(double x) { return raw_bump(x) / bump_norm_constant(); }

Field mollify(const Field& f, const Grid1D& grid, int n) {
  if (n < 1) throw std::invalid_argument("mollify: n must be >= 1");
  const double dx = grid.dx();
  const double width = 1.0 / n;
  if (width < 2.0 * dx) throw std::invalid_argument("under-resolved mollifier");

  const int K = static_cast<int>(std::ceil(width / dx)) + 1;
  std::vector<double> w(2 * K + 1, 0.0);
  for (int m = -K; m <= K; ++m) {
    double lo = std::max(m * dx - 0.5 * dx, -width);
    double hi = std::min(m * dx + 0.5 * dx, width);
    if (hi <= lo) continue;
    auto zeta_n = [&](double y) { return n * mollifier_bump(n * y); };
    w[m + K] = simpson(zeta_n, lo, hi, 8) / dx;
  }
  double total = 0.0;
  for (double v : w) total += v * dx;
  for (double& v : w) v /= total;  // discrete kernel mass exactly 1

  const int N = grid.n_cells;
  Field out(N, 0.0);
  for (int j = 0; j < N; ++j) {
    double acc = 0.0;
    int m_lo = std::max(-K, j - (N - 1));
    int m_hi = std::min(K, j);
    for (int m = m_lo; m <= m_hi; ++m) acc += w[m + K] * f[j - m];
    out[j] = acc * dx;
  }
  return out;
}

// --- kernels ---------------------------------------------------------------

namespace {
double sampled_w3inf(const ScalarFn& f, const ScalarFn& d1, const ScalarFn& d2,
                     const ScalarFn& d3, double lo, double hi) {
  double m = 0.0;
  const int S = 20000;
  for (int i = 0; i <= S; ++i) {
    double x = lo + (hi - lo) * i / S;
    m = std::max({m, std::abs(f(x)), std::abs(d1(x)), std::abs(d2(x)), std::abs(d3(x))});
  }
  return m * 1.01;
}
}  // namespace

Kernel gaussian_kernel(double sigma, double cutoff) {
  if (sigma <= 0) throw std::invalid_argument("gaussian kernel: sigma must be positive");
  const double W = 6.0 * sigma;
  const double tail = std::erfc(6.0 / std::sqrt(2.0));  // mass beyond 6 sigma
  const double scale = 1.0 / (1.0 - tail);
  const double s2 = sigma * sigma;
  const double norm = scale / (sigma * std::sqrt(2.0 * M_PI));
  auto g = [=](double x) { return norm * std::exp(-0.5 * x * x / s2); };

  Kernel k;
  k.name = "gaussian";
  k.evaluate = [=](double x) { return std::abs(x) <= W ? g(x) : 0.0; };
  k.d1 = [=](double x) { return std::abs(x) <= W ? -x / s2 * g(x) : 0.0; };
  k.d2 = [=](double x) { return std::abs(x) <= W ? (x * x / (s2 * s2) - 1.0 / s2) * g(x) : 0.0; };
  k.d3 = [=](double x) {
    return std::abs(x) <= W ? (3.0 * x / (s2 * s2) - x * x * x / (s2 * s2 * s2)) * g(x) : 0.0;
  };
  k.support_back = W;
  k.support_fwd = W;
  k.tail_mass = tail;
  (void)cutoff;
  k.w3inf_bound = sampled_w3inf(k.evaluate, k.d1, k.d2, k.d3, -W, W);
  return k;
}

Kernel forward_exponential_kernel(double lambda, double cutoff) {
  if (lambda <= 0) throw std::invalid_argument("forward-exponential kernel: lambda must be positive");
  const double eps = 0.1 / lambda;  // smoothing width at the left edge

  // base(s) = lambda*exp(-lambda*s), smoothed by sstep3(s/eps).
  auto step = [=](double s) { return sstep3(s / eps); };
  auto step_d = [=](double s, int order) {
    double y = s / eps;
    if (y <= 0 || y >= 1) return 0.0;
    double y2 = y * y, y3 = y2 * y, y4 = y3 * y, y5 = y4 * y, y6 = y5 * y;
    double v = 0;
    switch (order) {
      case 1: v = 140 * y3 - 420 * y4 + 420 * y5 - 140 * y6; break;
      case 2: v = 420 * y2 - 1680 * y3 + 2100 * y4 - 840 * y5; break;
      case 3: v = 840 * y - 5040 * y2 + 8400 * y3 - 4200 * y4; break;
      default: throw std::logic_error("step_d order");
    }
    return v / std::pow(eps, order);
  };

  auto raw = [=](double s) { return s <= 0 ? 0.0 : lambda * std::exp(-lambda * s) * step(s); };
  const double m = simpson(raw, 0.0, 60.0 / lambda, 60000);
  const double A = 1.0 / m;

  auto base = [=](double s) { return A * lambda * std::exp(-lambda * s); };
  Kernel k;
  k.name = "forward-exponential";
  k.evaluate = [=](double s) { return s <= 0 ? 0.0 : base(s) * step(s); };
  k.d1 = [=](double s) {
    if (s <= 0) return 0.0;
    return base(s) * (step_d(s, 1) - lambda * step(s));
  };
  k.d2 = [=](double s) {
    if (s <= 0) return 0.0;
    return base(s) * (step_d(s, 2) - 2 * lambda * step_d(s, 1) + lambda * lambda * step(s));
  };
  k.d3 = [=](double s) {
    if (s <= 0) return 0.0;
    return base(s) * (step_d(s, 3) - 3 * lambda * step_d(s, 2) +
                      3 * lambda * lambda * step_d(s, 1) - lambda * lambda * lambda * step(s));
  };
  k.support_back = 0.0;
  k.support_fwd = std::log(A * lambda / cutoff) / lambda;
  k.tail_mass = cutoff / lambda;
  k.w3inf_bound = sampled_w3inf(k.evaluate, k.d1, k.d2, k.d3, 0.0, k.support_fwd);
  return k;
}

// --- local speed laws ------------------------------------------------------

LocalSpeedLaw greenshields_law(double V_L, double R_L, double delta) {
  if (V_L <= 0 || R_L <= 0) throw std::invalid_argument("greenshields: V_L, R_L must be positive");
  if (delta <= 0 || 2 * delta >= R_L) throw std::invalid_argument("greenshields: bad blend delta");
  const double slope = -V_L / R_L;
  auto line = [=](double q) { return V_L * (1.0 - q / R_L); };
  QuinticJoin left{0.0, delta, V_L, 0.0, line(delta), slope};
  QuinticJoin right{R_L - delta, R_L, line(R_L - delta), slope, 0.0, 0.0};

  LocalSpeedLaw law;
  law.V_L = V_L;
  law.R_L = R_L;
  law.profile = [=](double q) {
    if (q <= 0) return V_L;
    if (q >= R_L) return 0.0;
    if (q < delta) return left.value(q);
    if (q > R_L - delta) return right.value(q);
    return line(q);
  };
  law.d1 = [=](double q) {
    if (q <= 0 || q >= R_L) return 0.0;
    if (q < delta) return left.d1(q);
    if (q > R_L - delta) return right.d1(q);
    return slope;
  };
  law.d2 = [=](double q) {
    if (q <= 0 || q >= R_L) return 0.0;
    if (q < delta) return left.d2(q);
    if (q > R_L - delta) return right.d2(q);
    return 0.0;
  };
  return law;
}

LocalSpeedLaw example1_local_law() {
  // 1 - r holds on [delta0, 1] which covers the pinned interval [1/2, 1].
  // C^2 at r = 1 forces slope -1 there, so the law dips below zero on
  // (1, R_L) before its cutoff; the hypothesis set never requires v_L >= 0.
  const double delta0 = 0.25;
  const double R_L = 1.1;
  QuinticJoin left{0.0, delta0, 1.0, 0.0, 1.0 - delta0, -1.0};
  QuinticJoin tail{1.0, R_L, 0.0, -1.0, 0.0, 0.0};

  LocalSpeedLaw law;
  law.V_L = 1.0;
  law.R_L = R_L;
  law.profile = [=](double q) {
    if (q <= 0) return 1.0;
    if (q >= R_L) return 0.0;
    if (q < delta0) return left.value(q);
    if (q <= 1.0) return 1.0 - q;
    return tail.value(q);
  };
  law.d1 = [=](double q) {
    if (q <= 0 || q >= R_L) return 0.0;
    if (q < delta0) return left.d1(q);
    if (q <= 1.0) return -1.0;
    return tail.d1(q);
  };
  law.d2 = [=](double q) {
    if (q <= 0 || q >= R_L) return 0.0;
    if (q < delta0) return left.d2(q);
    if (q <= 1.0) return 0.0;
    return tail.d2(q);
  };
  return law;
}

SpeedComponent tanh_speed_component(double v_max, double q0, double width) {
  if (width <= 0) throw std::invalid_argument("tanh speed law: width must be positive");
  auto T = [=](double q) { return std::tanh((q - q0) / width); };
  auto C2 = [=](double q) { double t = T(q); return 1.0 - t * t; };
  SpeedComponent c;
  c.f = [=](double q) { return 0.5 * v_max * (1.0 - T(q)); };
  c.d1 = [=](double q) { return -0.5 * v_max / width * C2(q); };
  c.d2 = [=](double q) { return v_max / (width * width) * T(q) * C2(q); };
  c.d3 = [=](double q) {
    double t = T(q), c2 = C2(q);
    return v_max / (width * width * width) * c2 * (c2 - 2.0 * t * t);
  };
  return c;
}

namespace {
SpeedComponent zero_speed_component() {
  auto z = [](double) { return 0.0; };
  return SpeedComponent{z, z, z, z};
}

double nl_w3inf(const NonlocalSpeedLaw& law) {
  double m = 0.0;
  for (const auto& c : law.components)
    m = std::max(m, sampled_w3inf(c.f, c.d1, c.d2, c.d3, -10.0, 20.0));
  return m;
}

double nl_sup_speed(const NonlocalSpeedLaw& law) {
  double m = 0.0;
  for (const auto& c : law.components) {
    for (int i = 0; i <= 20000; ++i) {
      double q = -10.0 + 30.0 * i / 20000.0;
      m = std::max(m, std::abs(c.f(q)));
    }
  }
  return m * 1.01;
}
}  // namespace

// --- builtin models ----------------------------------------------------------

BuiltModel builtin_model(const std::string& name, const std::string& params_json) {
  using nlohmann::json;
  json p = json::parse(params_json.empty() ? "{}" : params_json);

  auto get_array = [&](const char* key, int k, std::vector<double> defaults) {
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = defaults[std::min<size_t>(i, defaults.size() - 1)];
    if (p.contains(key)) {
      if (p[key].is_number())
        std::fill(out.begin(), out.end(), p[key].get<double>());
      else
        for (int i = 0; i < k && i < static_cast<int>(p[key].size()); ++i)
          out[i] = p[key][i].get<double>();
    }
    return out;
  };

  BuiltModel m;
  m.name = name;
  if (name == "example1") {
    m.kernels = {gaussian_kernel(0.5)};
    m.v_nl.components = {zero_speed_component()};
    m.v_nl.w3inf_bound = 0.0;
    m.v_nl.sup_speed = 0.0;
    m.v_l = example1_local_law();
    return m;
  }

  const int k = p.value("k", 1);
  if (k < 1) throw std::invalid_argument("builtin_model: k must be >= 1");
  const double cutoff = p.value("cutoff", 1e-12);

  if (name == "gaussian-greenshields") {
    auto sigmas = get_array("sigma", k, {0.5});
    for (double s : sigmas) m.kernels.push_back(gaussian_kernel(s, cutoff));
  } else if (name == "forward-exponential") {
    auto lambdas = get_array("lambda", k, {1.0});
    for (double l : lambdas) m.kernels.push_back(forward_exponential_kernel(l, cutoff));
  } else {
    throw std::invalid_argument("builtin_model: unknown name '" + name + "'");
  }

  auto vmax = get_array("v_max", k, {1.0, 0.8, 0.6});
  auto q0 = get_array("q0", k, {0.5, 0.6, 0.7});
  auto width = get_array("width", k, {0.25, 0.3, 0.35});
  for (int i = 0; i < k; ++i)
    m.v_nl.components.push_back(tanh_speed_component(vmax[i], q0[i], width[i]));
  m.v_nl.w3inf_bound = nl_w3inf(m.v_nl);
  m.v_nl.sup_speed = nl_sup_speed(m.v_nl);

  const double V_L = p.value("V_L", 1.0);
  const double R_L = p.value("R_L", 1.0);
  const double delta = p.value("delta", R_L / 10.0);
  m.v_l = greenshields_law(V_L, R_L, delta);
  return m;
}

BuiltModel model_from_descriptor(const std::string& descriptor_json) {
  using nlohmann::json;
  json d = json::parse(descriptor_json);
  BuiltModel m;
  m.name = "custom";

  auto as_list = [](const json& j) {
    return j.is_array() ? std::vector<json>(j.begin(), j.end()) : std::vector<json>{j};
  };

  if (!d.contains("kernel") || !d.contains("v_nl") || !d.contains("v_l"))
    throw std::invalid_argument("model descriptor: needs kernel, v_nl and v_l entries");

  for (const json& k : as_list(d["kernel"])) {
    std::string fam = k.value("family", "gaussian");
    double cutoff = k.value("cutoff", 1e-12);
    if (fam == "gaussian")
      m.kernels.push_back(gaussian_kernel(k.value("sigma", 0.5), cutoff));
    else if (fam == "forward-exponential")
      m.kernels.push_back(forward_exponential_kernel(k.value("lambda", 1.0), cutoff));
    else
      throw std::invalid_argument("model descriptor: unknown kernel family " + fam);
  }

  for (const json& v : as_list(d["v_nl"])) {
    std::string fam = v.value("family", "tanh");
    if (fam == "tanh")
      m.v_nl.components.push_back(tanh_speed_component(
          v.value("v_max", 1.0), v.value("q0", 0.5), v.value("width", 0.25)));
    else if (fam == "zero")
      m.v_nl.components.push_back(zero_speed_component());
    else if (fam == "constant") {
      double c = v.value("value", 1.0);
      auto z = [](double) { return 0.0; };
      m.v_nl.components.push_back(SpeedComponent{[c](double) { return c; }, z, z, z});
    } else {
      throw std::invalid_argument("model descriptor: unknown v_nl family " + fam);
    }
  }
  if (m.v_nl.components.size() == 1 && m.kernels.size() > 1)
    while (m.v_nl.components.size() < m.kernels.size())
      m.v_nl.components.push_back(m.v_nl.components.front());
  if (m.kernels.size() != m.v_nl.components.size())
    throw std::invalid_argument("model descriptor: kernel / v_nl class counts differ");
  m.v_nl.w3inf_bound = nl_w3inf(m.v_nl);
  m.v_nl.sup_speed = nl_sup_speed(m.v_nl);

  const json& vl = d["v_l"];
  std::string fam = vl.value("family", "greenshields");
  if (fam == "greenshields") {
    double R = vl.value("R_L", 1.0);
    m.v_l = greenshields_law(vl.value("V_L", 1.0), R, vl.value("delta", R / 10.0));
  } else if (fam == "example1") {
    m.v_l = example1_local_law();
  } else {
    throw std::invalid_argument("model descriptor: unknown v_l family " + fam);
  }
  return m;
}

// --- hypothesis screening ----------------------------------------------------

namespace {

struct FnBundle {
  const ScalarFn* f[4] = {nullptr, nullptr, nullptr, nullptr};
  int orders = 0;
};

// Centered finite differences of level d against the supplied level d+1,
// with tolerance 10*h^2*bound3 where bound3 estimates the third derivative
// of level d (estimated from the next two supplied levels where available).
void fd_consistency_check(HypothesisCheck& chk, const FnBundle& fns, double lo, double hi,
                          int samples, std::mt19937_64& rng, double global_bound) {
  std::uniform_real_distribution<double> U(lo, hi);
  const double h = std::max(1e-4, 1e-4 * (hi - lo));
  for (int level = 0; level + 1 < fns.orders; ++level) {
    const ScalarFn& f = *fns.f[level];
    const ScalarFn& df = *fns.f[level + 1];
    for (int s = 0; s < samples; ++s) {
      double x = U(rng);
      double fd = (f(x + h) - f(x - h)) / (2 * h);
      double resid = std::abs(fd - df(x));
      // the centered-difference error scales with the third derivative of
      // this level; estimate it from a second difference of the next
      // supplied level (for level 0 the W3inf bound also applies)
      const ScalarFn& dnext = *fns.f[level + 1];
      double b3 = std::abs(dnext(x + h) - 2.0 * dnext(x) + dnext(x - h)) / (h * h);
      if (level == 0) b3 = std::max(b3, global_bound);
      double tol = 10.0 * h * h * std::max(b3, 1.0) + 1e-9 * (1.0 + std::abs(df(x)));
      if (resid > tol && resid > chk.worst_value) {
        chk.pass = false;
        chk.worst_value = resid;
        chk.worst_at = x;
        chk.tolerance = tol;
      }
      chk.tolerance = std::max(chk.tolerance, tol);
    }
  }
}

// Trapezoid sweep: the increment of f over each partition interval must match
// the trapezoid of the supplied derivative; a jump anywhere inside an interval
// breaks this regardless of where samples land. The trapezoid error scales
// with the curvature of df, estimated by its own second difference.
void sweep_consistency_check(HypothesisCheck& chk, const ScalarFn& f, const ScalarFn& df,
                             double lo, double hi, int intervals) {
  const double dlt = (hi - lo) / intervals;
  for (int i = 0; i < intervals; ++i) {
    double x0 = lo + i * dlt, x1 = x0 + dlt, xm = 0.5 * (x0 + x1);
    double resid = std::abs(f(x1) - f(x0) - 0.5 * (df(x0) + df(x1)) * dlt);
    double curv = std::abs(df(x1) - 2.0 * df(xm) + df(x0)) / (0.25 * dlt * dlt);
    double tol = 4.0 * dlt * dlt * dlt * (curv + 1.0) / 12.0 + 1e-9;
    if (resid > tol && resid > chk.worst_value) {
      chk.pass = false;
      chk.worst_value = resid;
      chk.worst_at = xm;
      chk.tolerance = tol;
    }
    chk.tolerance = std::max(chk.tolerance, tol);
  }
}

void bound_check(HypothesisCheck& chk, const FnBundle& fns, double lo, double hi, int samples,
                 std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> U(lo, hi);
  chk.tolerance = bound;
  for (int s = 0; s < samples; ++s) {
    double x = U(rng);
    for (int level = 0; level < fns.orders; ++level) {
      double v = std::abs((*fns.f[level])(x));
      if (v > bound * (1.0 + 1e-9) + 1e-12 && v > chk.worst_value) {
        chk.pass = false;
        chk.worst_value = v;
        chk.worst_at = x;
      }
    }
  }
}

}  // namespace

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.pass) out << " (worst " << c.worst_value << " at " << c.worst_at << ", tol " << c.tolerance << ")";
    if (!c.detail.empty()) out << " [" << c.detail << "]";
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_hypotheses(const std::vector<Kernel>& kernels,
                                     const NonlocalSpeedLaw& v_nl, const LocalSpeedLaw& v_l,
                                     int sample_count, unsigned long seed) {
  if (sample_count < 100) throw std::invalid_argument("validate_hypotheses: sample_count must be >= 100");
  std::mt19937_64 rng(seed);
  ValidationReport rep;

  for (size_t i = 0; i < kernels.size(); ++i) {
    const Kernel& k = kernels[i];
    double lo = -k.support_back - 0.5, hi = k.support_fwd + 0.5;
    FnBundle fns;
    fns.f[0] = &k.evaluate;
    fns.f[1] = &k.d1;
    fns.f[2] = &k.d2;
    fns.f[3] = &k.d3;
    fns.orders = 4;

    HypothesisCheck b;
    b.name = "(eta) kernel " + std::to_string(i + 1) + " W3inf bound";
    bound_check(b, fns, lo, hi, sample_count, rng, k.w3inf_bound);
    rep.checks.push_back(b);

    HypothesisCheck c;
    c.name = "(eta) kernel " + std::to_string(i + 1) + " C3 consistency";
    fd_consistency_check(c, fns, -k.support_back + 1e-6, k.support_fwd - 1e-6, sample_count, rng,
                         k.w3inf_bound);
    rep.checks.push_back(c);

    HypothesisCheck w;
    w.name = "(eta) kernel " + std::to_string(i + 1) + " support window";
    w.tolerance = 1e-10;
    std::uniform_real_distribution<double> U(0.5, 5.0);
    for (int s = 0; s < sample_count; ++s) {
      double off = U(rng);
      for (double x : {k.support_fwd + off, -k.support_back - off}) {
        double v = std::abs(k.evaluate(x));
        if (v > 1e-10 && v > w.worst_value) {
          w.pass = false;
          w.worst_value = v;
          w.worst_at = x;
        }
      }
    }
    {
      std::ostringstream d;
      d << "window [" << -k.support_back << ", " << k.support_fwd << "], neglected tail mass "
        << k.tail_mass;
      w.detail = d.str();
    }
    rep.checks.push_back(w);
  }

  for (int i = 0; i < v_nl.class_count(); ++i) {
    const SpeedComponent& c = v_nl.components[i];
    FnBundle fns;
    fns.f[0] = &c.f;
    fns.f[1] = &c.d1;
    fns.f[2] = &c.d2;
    fns.f[3] = &c.d3;
    fns.orders = 4;
    HypothesisCheck b;
    b.name = "(vNL) component " + std::to_string(i + 1) + " W3inf bound";
    bound_check(b, fns, -5.0, 10.0, sample_count, rng, v_nl.w3inf_bound);
    rep.checks.push_back(b);
    HypothesisCheck fd;
    fd.name = "(vNL) component " + std::to_string(i + 1) + " C3 consistency";
    fd_consistency_check(fd, fns, -5.0, 10.0, sample_count, rng, v_nl.w3inf_bound);
    rep.checks.push_back(fd);
  }

  {
    HypothesisCheck cut;
    cut.name = "(vL) cutoff identities";
    cut.tolerance = 0.0;
    std::uniform_real_distribution<double> Uneg(-3.0, 0.0), Upos(v_l.R_L, v_l.R_L + 3.0);
    for (int s = 0; s < sample_count; ++s) {
      double r1 = Uneg(rng);
      if (v_l.profile(r1) != v_l.V_L) {
        cut.pass = false;
        cut.worst_value = std::abs(v_l.profile(r1) - v_l.V_L);
        cut.worst_at = r1;
      }
      double r2 = Upos(rng);
      if (v_l.profile(r2) != 0.0) {
        cut.pass = false;
        cut.worst_value = std::abs(v_l.profile(r2));
        cut.worst_at = r2;
      }
    }
    rep.checks.push_back(cut);

    HypothesisCheck c2;
    c2.name = "(vL) C2 consistency";
    sweep_consistency_check(c2, v_l.profile, v_l.d1, -1.0, v_l.R_L + 1.0,
                            std::max(sample_count, 400));
    sweep_consistency_check(c2, v_l.d1, v_l.d2, -1.0, v_l.R_L + 1.0,
                            std::max(sample_count, 400));
    rep.checks.push_back(c2);
  }

  return rep;
}

// --- initial data ------------------------------------------------------------

void InitialDatum::validate(double R_L) const {
  auto check_finite = [](const Field& f) {
    for (double v : f)
      if (!std::isfinite(v)) throw std::invalid_argument("initial datum: non-finite entry");
  };
  for (const Field& c : rho0) check_finite(c);
  check_finite(r0);
  if (!physical) return;
  for (const Field& c : rho0)
    for (double v : c)
      if (v < 0.0) throw std::invalid_argument("initial datum: negative informed density");
  for (double v : r0)
    if (v < 0.0 || v > R_L)
      throw std::invalid_argument("initial datum: local density outside [0, R_L]");
}

InitialDatum example1_datum(const Grid1D& grid, int n) {
  if (n < 1) throw std::invalid_argument("example1_datum: n must be >= 1");
  if (1.0 / n < 8.0 * grid.dx())
    throw std::invalid_argument("example1_datum: grid must resolve 1/n by >= 8 cells");
  InitialDatum d;
  d.rho0.assign(1, Field(grid.n_cells, 0.0));
  d.r0.assign(grid.n_cells, 0.0);
  for (int j = 0; j < grid.n_cells; ++j) {
    double x = grid.center(j);
    double& rho = d.rho0[0][j];
    if (x >= 1.0 - 1.0 / n && x <= 1.0)
      rho = 1.0 + n * (x - 1.0);
    else if (x > 1.0 && x <= 1.0 + 1.0 / n)
      rho = 1.0 - n * (x - 1.0);
    double& r = d.r0[j];
    if (x >= 0.0 && x <= 1.0 - 1.0 / n)
      r = 1.0;
    else if (x > 1.0 - 1.0 / n && x <= 1.0)
      r = n * (1.0 - x);
  }
  return d;
}

InitialDatum example1_limit_datum(const Grid1D& grid) {
  InitialDatum d;
  d.rho0.assign(1, Field(grid.n_cells, 0.0));
  d.r0.assign(grid.n_cells, 0.0);
  for (int j = 0; j < grid.n_cells; ++j) {
    double x = grid.center(j);
    if (x >= 0.0 && x <= 1.0) d.r0[j] = 1.0;
  }
  return d;
}

Field bump_field(const Grid1D& grid, double amp, double center, double width) {
  Field f(grid.n_cells, 0.0);
  for (int j = 0; j < grid.n_cells; ++j) {
    double y = (grid.center(j) - center) / width;
    if (std::abs(y) < 1.0) f[j] = amp * std::exp(1.0 - 1.0 / (1.0 - y * y));
  }
  return f;
}

Field field_from_csv(const Grid1D& grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
      continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
    pts.emplace_back(std::stod(a), std::stod(b));
  }
  if (pts.size() < 2) throw std::runtime_error("csv field: need at least two samples");
  std::sort(pts.begin(), pts.end());
  Field f(grid.n_cells, 0.0);
  for (int j = 0; j < grid.n_cells; ++j) {
    double x = grid.center(j);
    if (x < pts.front().first || x > pts.back().first) continue;
    auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(x, -1e300));
    if (it == pts.begin()) {
      f[j] = it->second;
      continue;
    }
    auto prev = std::prev(it);
    double t = (x - prev->first) / (it->first - prev->first);
    f[j] = (1 - t) * prev->second + t * it->second;
  }
  return f;
}

}  // namespace nltraffic
