#ifndef NLTRAFFIC_VERIFY_HPP
#define NLTRAFFIC_VERIFY_HPP

#include <string>
#include <vector>

#include "nltraffic/coupler.hpp"
#include "nltraffic/grid.hpp"
#include "nltraffic/model.hpp"
#include "nltraffic/nonlocal.hpp"

namespace nltraffic {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationSummary {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string to_json() const;
  std::string to_text() const;  // one line per check with the tolerance
};

// Each check is independently re-runnable; tolerances are fixed here and
// echoed in the output.

/// Per-class L1 conservation of the informed densities (rel 1e-12) and of
/// the local density (abs 1e-10 when the datum is in the physical regime).
std::vector<CheckResult> check_mass_conservation(const std::vector<State>& outputs,
                                                 const State& initial, bool r_equality);

/// min rho >= -1e-12, r in [-1e-12, R_L + 1e-12] at every output.
std::vector<CheckResult> check_invariance(const std::vector<State>& outputs, double R_L);

/// ||S_{t}(s) - S_{t/2}(S_{t/2}(s))||_L1 <= 2 * reference_distance.
CheckResult check_semigroup(const State& s0, double t, const PicardConfig& cfg,
                            const BuiltModel& model, double reference_distance);

/// ||q||_inf <= TV(q)/2 + 1e-12 over `cases` random piecewise-constant fields.
CheckResult check_half_tv(int cases, unsigned long seed);

/// TV(r(t)) <= 2 (TV(r_o) e^{kappa t} + source(t)) with kappa and the source
/// integral measured from the slabs.
CheckResult check_tv_growth(const std::vector<SpaceTimeSlab>& slabs, const LocalSpeedLaw& law);

/// Jacobian bound of the characteristics run: max |log E| <= Q_hat * t + 0.1.
CheckResult check_jacobian_bound(const CharDiagnostics& diag, double t);

struct CrossSolverResult {
  CheckResult check;
  double distance_coarse = 0.0;
  double distance_fine = 0.0;
  CharDiagnostics diag_coarse;  // for the Jacobian-bound check
};

/// L1 distance between the FV and characteristics solutions of the nonlocal
/// sub-problem (local history frozen at r0) at two resolutions; passes when
/// the coarse distance is below frac * ||rho_o||_L1 and refinement shrinks
/// it by >= 1.5.
CrossSolverResult check_cross_solver(const BuiltModel& model, const State& s0, double horizon,
                                     double frac);

/// Lipschitz probe alpha(t) <= 1 + C t for some C <= c_cap.
CheckResult check_lipschitz(const LipschitzProbe& probe, double c_cap);

/// Two evolutions of the same config produce byte-identical CSV snapshots.
CheckResult check_determinism(const State& s0, double horizon, const PicardConfig& cfg,
                              const BuiltModel& model);

}  // namespace nltraffic

#endif
