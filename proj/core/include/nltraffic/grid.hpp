#ifndef NLTRAFFIC_GRID_HPP
#define NLTRAFFIC_GRID_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nltraffic {

using Field = std::vector<double>;

/// Uniform 1-D cell-centered grid on [x_min, x_max].
///
/// Fields sampled on the grid are implicitly extended by zero outside
/// [x_min, x_max]; all discrete norms below follow that convention, so
/// boundary jumps count toward the total variation.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 8;

  Grid1D() = default;
  Grid1D(double a, double b, int n);

  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int j) const { return x_min + (j + 0.5) * dx(); }

  /// Index of the cell whose center is nearest to x, clamped to the grid.
  int nearest_cell(double x) const;

  bool operator==(const Grid1D&) const = default;
};

/// Densities of the k informed classes plus the local class at one instant.
struct State {
  Grid1D grid;
  std::vector<Field> rho;  // k fields
  Field r;
  double time = 0.0;

  int class_count() const { return static_cast<int>(rho.size()); }
  Field sum_rho() const;
};

State make_state(const Grid1D& grid, int k);

/// All discrete norms of one field, as used in the stability estimates.
struct NormReport {
  double l1 = 0.0;
  double linf = 0.0;
  double w11 = 0.0;
  double tv = 0.0;
  double cbv1 = 0.0;
};

// Compensated (Neumaier) summation; the mass-conservation checks run at
// 1e-12 relative over thousands of steps, where plain summation noise shows.
double neumaier_sum(const Field& f);

double l1_norm(const Field& f, double dx);
double linf_norm(const Field& f);

/// Total variation with zero extension: interior jumps plus |first| + |last|.
double tv(const Field& f);

/// Interior forward differences, length N-1. This is the discrete derivative
/// used by w11_norm and cbv1_norm; the convention is fixed so independent
/// oracles can reproduce the values bit-for-bit.
Field forward_diff(const Field& f, double dx);

double w11_norm(const Field& f, double dx);
double cbv1_norm(const Field& f, double dx);

NormReport norm_report(const Field& f, double dx);

/// ‖q‖_∞ ≤ ½ TV(q) + 1e-12 for zero-extended fields.
bool half_tv_bound_check(const Field& f);

double mass(const Field& f, double dx);
double l1_distance(const Field& a, const Field& b, double dx);

/// CSV snapshot: comment header with time/grid metadata, then
/// columns x, rho_1..rho_k, r. Deterministic formatting (%.17g).
void write_state_csv(const State& s, std::ostream& out);
void write_state_csv(const State& s, const std::string& path);
State read_state_csv(std::istream& in);
State read_state_csv(const std::string& path);

}  // namespace nltraffic

#endif
