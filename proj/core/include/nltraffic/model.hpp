#ifndef NLTRAFFIC_MODEL_HPP
#define NLTRAFFIC_MODEL_HPP

#include <functional>
#include <string>
#include <vector>

#include "nltraffic/grid.hpp"

namespace nltraffic {

using ScalarFn = std::function<double(double)>;

/// Averaging kernel with analytic derivatives to order 3 and an effective
/// support window [-support_back, support_fwd] in the kernel's own argument.
/// Values are 1/length so that convolving a density gives a dimensionless
/// argument for the speed laws.
struct Kernel {
  ScalarFn evaluate;
  ScalarFn d1, d2, d3;
  double support_back = 0.0;
  double support_fwd = 0.0;
  double w3inf_bound = 0.0;
  double tail_mass = 0.0;  // neglected mass outside the window, reported
  std::string name;
};

/// One component of the informed-class speed law, C^3 with bounded
/// derivatives; no sign or monotonicity assumption is imposed.
struct SpeedComponent {
  ScalarFn f;
  ScalarFn d1, d2, d3;
};

struct NonlocalSpeedLaw {
  std::vector<SpeedComponent> components;
  double w3inf_bound = 0.0;  // bounds values and derivatives to order 3
  double sup_speed = 0.0;    // bounds the values only (|v| <= sup|v_NL|)
  int class_count() const { return static_cast<int>(components.size()); }
};

/// Local-class speed law: C^2 with exact cutoffs profile(r)=V_L for r<=0 and
/// profile(r)=0 for r>=R_L.
struct LocalSpeedLaw {
  ScalarFn profile;
  ScalarFn d1, d2;
  double V_L = 1.0;
  double R_L = 1.0;
};

struct InitialDatum {
  std::vector<Field> rho0;
  Field r0;
  bool physical = true;  // when set, r0 must lie in [0, R_L] and rho0 >= 0
  int class_count() const { return static_cast<int>(rho0.size()); }

  /// All entries finite; in the physical regime additionally rho0 >= 0 and
  /// r0 in [0, R_L]. Throws std::invalid_argument otherwise.
  void validate(double R_L) const;
};

// ---------------------------------------------------------------------------
// Smoothing mollifier: zeta_n(x) = n*zeta(n*x) with the standard
// bump zeta(x) ~ exp(-1/(1-x^2)) on (-1,1), normalized to unit mass.

/// Convolve a grid field with zeta_n. Cell weights come from per-cell
/// composite Simpson quadrature of zeta_n and are renormalized so the
/// discrete kernel mass is exactly 1 (hence the discrete L1 norm cannot
/// grow). Throws "under-resolved mollifier" when 1/n < 2*dx.
Field mollify(const Field& f, const Grid1D& grid, int n);

/// The normalized bump itself (unit mass, support [-1,1]).
double mollifier_bump(double x);

// ---------------------------------------------------------------------------
// Numerical screening of the standing hypotheses.

struct HypothesisCheck {
  std::string name;
  bool pass = true;
  double worst_value = 0.0;  // worst residual found
  double worst_at = 0.0;     // sample location of the worst residual
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass() const;
  std::string summary() const;
};

/// Deterministic given the seed. sample_count >= 100.
ValidationReport validate_hypotheses(const std::vector<Kernel>& kernels,
                                     const NonlocalSpeedLaw& v_nl, const LocalSpeedLaw& v_l,
                                     int sample_count, unsigned long seed = 12345);

// ---------------------------------------------------------------------------
// Built-in model families. All built-ins pass validate_hypotheses.

struct BuiltModel {
  std::vector<Kernel> kernels;  // one per class
  NonlocalSpeedLaw v_nl;
  LocalSpeedLaw v_l;
  std::string name;
};

/// Gaussian kernel truncated at 6*sigma and renormalized to unit mass;
/// the discarded tail mass is recorded on the kernel.
Kernel gaussian_kernel(double sigma, double cutoff = 1e-12);

/// One-sided exponential look window: eta(s) = A*lambda*exp(-lambda*s) for
/// s >= 0, smoothed near 0 by a C^3 step so the hypothesis (C^3) holds,
/// renormalized to unit mass. support_back = 0.
Kernel forward_exponential_kernel(double lambda, double cutoff = 1e-12);

/// Greenshields profile V_L*(1 - q/R_L) with C^2 quintic Hermite joins on
/// [0, delta] and [R_L - delta, R_L]; exact cutoffs outside [0, R_L].
LocalSpeedLaw greenshields_law(double V_L, double R_L, double delta);

/// The speed law of the stationary example: equals 1 - r on [1/4, 1]
/// (in particular on [1/2, 1]), joins V_L = 1 at 0, and continues past 1
/// with a C^2 nonpositive tail vanishing for r >= R_L = 1.1.
LocalSpeedLaw example1_local_law();

/// Bounded C^3 informed-class law V*(1 - tanh((q - q0)/width))/2.
SpeedComponent tanh_speed_component(double v_max, double q0, double width);

/// name in {"gaussian-greenshields", "forward-exponential", "example1"}.
/// Parameters (JSON text, may be empty "{}"): see README. Throws on an
/// unknown name.
BuiltModel builtin_model(const std::string& name, const std::string& params_json);

/// Assemble a model from a per-ingredient JSON descriptor
///   {"kernel": {...} | [{...}, ...], "v_nl": {...} | [...], "v_l": {...}}
/// kernel families: {"family":"gaussian","sigma":s} and
/// {"family":"forward-exponential","lambda":l}; v_nl families:
/// {"family":"tanh","v_max":V,"q0":q,"width":w}, {"family":"zero"},
/// {"family":"constant","value":c}; v_l families:
/// {"family":"greenshields","V_L":..,"R_L":..,"delta":..},
/// {"family":"example1"}.
BuiltModel model_from_descriptor(const std::string& descriptor_json);

// ---------------------------------------------------------------------------
// Initial data.

/// The stationary pair of the instability example: rho a hat of height 1 on
/// [1-1/n, 1+1/n], r equal to 1 on [0, 1-1/n] ramping to 0 at 1.
InitialDatum example1_datum(const Grid1D& grid, int n);

/// The L1 limit of example1_datum: (0, indicator of [0,1]).
InitialDatum example1_limit_datum(const Grid1D& grid);

/// Smooth compactly supported bump exp(1 - 1/(1-y^2)) scaled to amp at the
/// center, y = (x-center)/width.
Field bump_field(const Grid1D& grid, double amp, double center, double width);

/// Load a grid-sampled field from two-column CSV (x, value); linear
/// interpolation onto cell centers, zero outside the tabulated range.
Field field_from_csv(const Grid1D& grid, const std::string& path);

}  // namespace nltraffic

#endif
