#include "nltraffic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nltraffic {

Grid1D::Grid1D(double a, double b, int n) : x_min(a), x_max(b), n_cells(n) {
  if (n_cells < 8) throw std::invalid_argument("Grid1D: n_cells must be >= 8");
  if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
}

int Grid1D::nearest_cell(double x) const {
  int j = static_cast<int>(std::floor((x - x_min) / dx()));
  return std::clamp(j, 0, n_cells - 1);
}

Field State::sum_rho() const {
  Field s(grid.n_cells, 0.0);
  for (const Field& c : rho)
    for (int j = 0; j < grid.n_cells; ++j) s[j] += c[j];
  return s;
}

State make_state(const Grid1D& grid, int k) {
  State s;
  s.grid = grid;
  s.rho.assign(k, Field(grid.n_cells, 0.0));
  s.r.assign(grid.n_cells, 0.0);
  return s;
}

double neumaier_sum(const Field& f) {
  double sum = 0.0, comp = 0.0;
  for (double x : f) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double l1_norm(const Field& f, double dx) {
  Field a(f.size());
  for (size_t j = 0; j < f.size(); ++j) a[j] = std::abs(f[j]);
  return dx * neumaier_sum(a);
}

double linf_norm(const Field& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

double tv(const Field& f) {
  if (f.empty()) return 0.0;
  Field jumps;
  jumps.reserve(f.size() + 1);
  jumps.push_back(std::abs(f.front()));
  for (size_t j = 0; j + 1 < f.size(); ++j) jumps.push_back(std::abs(f[j + 1] - f[j]));
  jumps.push_back(std::abs(f.back()));
  return neumaier_sum(jumps);
}

Field forward_diff(const Field& f, double dx) {
  if (f.size() < 2) return {};
  Field d(f.size() - 1);
  for (size_t j = 0; j + 1 < f.size(); ++j) d[j] = (f[j + 1] - f[j]) / dx;
  return d;
}

double w11_norm(const Field& f, double dx) {
  return l1_norm(f, dx) + l1_norm(forward_diff(f, dx), dx);
}

double cbv1_norm(const Field& f, double dx) {
  return w11_norm(f, dx) + tv(forward_diff(f, dx));
}

NormReport norm_report(const Field& f, double dx) {
  NormReport n;
  n.l1 = l1_norm(f, dx);
  n.linf = linf_norm(f);
  n.tv = tv(f);
  n.w11 = w11_norm(f, dx);
  n.cbv1 = cbv1_norm(f, dx);
  return n;
}

bool half_tv_bound_check(const Field& f) {
  return linf_norm(f) <= 0.5 * tv(f) + 1e-12;
}

double mass(const Field& f, double dx) { return dx * neumaier_sum(f); }

double l1_distance(const Field& a, const Field& b, double dx) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: size mismatch");
  Field d(a.size());
  for (size_t j = 0; j < a.size(); ++j) d[j] = std::abs(a[j] - b[j]);
  return dx * neumaier_sum(d);
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_state_csv(const State& s, std::ostream& out) {
  out << "# time " << fmt(s.time) << "\n";
  out << "# grid " << fmt(s.grid.x_min) << " " << fmt(s.grid.x_max) << " " << s.grid.n_cells
      << "\n";
  out << "# classes " << s.class_count() << "\n";
  out << "x";
  for (int i = 0; i < s.class_count(); ++i) out << ",rho_" << (i + 1);
  out << ",r\n";
  for (int j = 0; j < s.grid.n_cells; ++j) {
    out << fmt(s.grid.center(j));
    for (int i = 0; i < s.class_count(); ++i) out << "," << fmt(s.rho[i][j]);
    out << "," << fmt(s.r[j]) << "\n";
  }
}

void write_state_csv(const State& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_state_csv(s, out);
}

State read_state_csv(std::istream& in) {
  State s;
  std::string line;
  double t = 0.0, a = 0.0, b = 1.0;
  int n = 0, k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "time") ls >> t;
      if (key == "grid") ls >> a >> b >> n;
      if (key == "classes") ls >> k;
      continue;
    }
    if (line[0] == 'x') break;  // column header
  }
  if (n <= 0 || k < 0) throw std::runtime_error("state csv: missing metadata header");
  s.grid = Grid1D(a, b, n);
  s.time = t;
  s.rho.assign(k, Field());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');  // x column, redundant
    for (int i = 0; i < k; ++i) {
      std::getline(ls, tok, ',');
      s.rho[i].push_back(std::stod(tok));
    }
    std::getline(ls, tok, ',');
    s.r.push_back(std::stod(tok));
  }
  if (static_cast<int>(s.r.size()) != n) throw std::runtime_error("state csv: row count mismatch");
  return s;
}

State read_state_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_state_csv(in);
}

}  // namespace nltraffic
