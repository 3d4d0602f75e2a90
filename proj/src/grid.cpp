#include <algorithm>
#include <cmath>
#include <limits>

#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

std::string to_string(Grading g) { return g == Grading::uniform ? "uniform" : "graded"; }

Grading grading_from_string(const std::string& s) {
  if (s == "uniform") return Grading::uniform;
  if (s == "graded") return Grading::graded;
  throw SchemaError("unknown grading '" + s + "'");
}

std::string to_string(DatumShape d) { return d == DatumShape::box ? "box" : "bump"; }

DatumShape datum_shape_from_string(const std::string& s) {
  if (s == "box") return DatumShape::box;
  if (s == "bump") return DatumShape::bump;
  throw SchemaError("unknown datum shape '" + s + "'");
}

RadialMeasure manifold_measure(const ModelFunction& psi) {
  RadialMeasure m;
  const int n = psi.n();
  m.log_area = [psi, n](double r) {
    return r > 0 ? (n - 1) * psi.log_psi(r) : -std::numeric_limits<double>::infinity();
  };
  m.log_mass = [psi, n](double a, double b) {
    if (b <= a) return -std::numeric_limits<double>::infinity();
    // psi ~ r below 1e-6, so the innermost piece is r^n / n.
    double acc = -std::numeric_limits<double>::infinity();
    const double r0 = 1e-6;
    if (a < r0) {
      const double hi = std::min(b, r0);
      acc = std::log((std::pow(hi, n) - std::pow(a, n)) / n);
      a = hi;
    }
    if (b > a) acc = log_add_exp(acc, log_shell_integral(psi, a, b));
    return acc;
  };
  m.omega = sphere_area(n);
  m.r_limit = psi.evaluable_beyond_range() ? 0.0 : psi.r_max();
  m.label = "manifold:" + to_string(psi.kind());
  return m;
}

RadialMeasure weighted_measure(const WeightProfile& rho, int n) {
  RadialMeasure m;
  m.log_area = [n](double s) { return s > 0 ? (n - 1) * std::log(s) : -std::numeric_limits<double>::infinity(); };
  m.log_mass = [rho, n](double a, double b) {
    if (b <= a) return -std::numeric_limits<double>::infinity();
    auto dens = [&](double s) { return s > 0 ? rho.log_rho(s) + (n - 1) * std::log(s) : -1e300; };
    const double ref = std::max(dens(b), dens(0.5 * (a + b)));
    const auto q = integrate([&](double s) { return std::exp(dens(s) - ref); }, a, b, 1e-12, 14);
    return ref + std::log(q.value);
  };
  m.omega = sphere_area(n);
  m.r_limit = rho.s_max();
  m.label = "weighted";
  return m;
}

double Grid::cell_mass_weight(std::size_t i) const { return omega * std::exp(log_vol[i]); }

double Grid::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < r.size(); ++i) h = std::min(h, r[i] - r[i - 1]);
  return h;
}

Grid make_grid(double R_max, int N, Grading grading, const RadialMeasure& measure, double band_end) {
  if (N < 100) throw ConstraintError("N>=100", "grid with N = " + std::to_string(N));
  if (!(R_max > 0)) throw ConstraintError("R_max>0", "R_max = " + std::to_string(R_max));
  if (measure.r_limit > 0 && R_max > measure.r_limit * (1 + 1e-12))
    throw RangeError("R_max beyond the sampled geometry (" + std::to_string(measure.r_limit) + ")");
  Grid g;
  g.grading = grading;
  g.omega = measure.omega;
  g.measure = measure.label;
  g.log_mass = measure.log_mass;
  g.r.resize(N + 1);
  const double band = band_end > 0 ? std::min(band_end, R_max) : 0.5 * R_max;
  if (grading == Grading::uniform || band >= R_max) {
    for (int i = 0; i <= N; ++i) g.r[i] = R_max * i / N;
  } else {
    const int Nf = static_cast<int>(std::lround(0.8 * N));
    const int Nc = N - Nf;
    const double h = band / Nf;
    for (int i = 0; i <= Nf; ++i) g.r[i] = h * i;
    const double rest = R_max - band;
    // geometric increments h q^k, k = 1..Nc, summing to rest
    auto total = [&](double q) { return q == 1.0 ? h * Nc : h * q * (std::pow(q, Nc) - 1) / (q - 1); };
    if (total(1.0) >= rest) {
      for (int k = 1; k <= Nc; ++k) g.r[Nf + k] = band + rest * k / Nc;
    } else {
      double lo = 1.0, hi = 2.0;
      while (total(hi) < rest) hi *= 2;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < rest ? lo : hi) = mid;
      }
      double x = band, inc = h;
      for (int k = 1; k <= Nc; ++k) {
        inc *= lo;
        x += inc;
        g.r[Nf + k] = x;
      }
    }
    g.r[N] = R_max;
  }
  g.log_vol.assign(N + 1, -std::numeric_limits<double>::infinity());
  g.a_plus.assign(N + 1, 0.0);
  g.a_minus.assign(N + 1, 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < N; ++i) {
    const double rp = 0.5 * (g.r[i] + g.r[i + 1]);
    const double rm = i > 0 ? 0.5 * (g.r[i - 1] + g.r[i]) : 0.0;
    const double lv = measure.log_mass(rm, rp);
    g.log_vol[i] = lv;
    g.a_plus[i] = std::exp(measure.log_area(rp) - lv) / (g.r[i + 1] - g.r[i]);
    if (i > 0) g.a_minus[i] = std::exp(measure.log_area(rm) - lv) / (g.r[i] - g.r[i - 1]);
  }
  for (int i = 0; i < N; ++i)
    if (!std::isfinite(g.log_vol[i]) || !std::isfinite(g.a_plus[i]))
      throw NumericalError("grid: non-finite control volume at r = " + std::to_string(g.r[i]));
  return g;
}

DatumStats datum_stats(DatumShape shape, double R, double M) {
  if (shape == DatumShape::box) return {R, M, M, R};
  return {R, M, 0.5625 * M, 0.5 * R};
}

RadialField make_datum(std::shared_ptr<const Grid> grid, DatumShape shape, double R, double M) {
  if (!(R > 0) || !(M >= 0)) throw ConstraintError("datum", "support and sup must be positive");
  if (R >= grid->R_max()) throw ConstraintError("R_max>support", "R_max smaller than initial support");
  RadialField f;
  f.grid = grid;
  f.u.assign(grid->nodes(), 0.0);
  for (std::size_t i = 0; i + 1 < grid->nodes(); ++i) {
    const double r = grid->r[i];
    if (r > R) break;
    if (shape == DatumShape::box) {
      f.u[i] = M;
    } else {
      const double x = 1 - (r / R) * (r / R);
      f.u[i] = M * x * x;
    }
  }
  return f;
}

Diagnostics diagnostics(const RadialField& f, double eps_support) {
  Diagnostics d;
  const Grid& g = *f.grid;
  for (double v : f.u) d.sup_norm = std::max(d.sup_norm, v);
  const double eps = eps_support < 0 ? 1e-9 * d.sup_norm : eps_support;
  double acc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < g.nodes(); ++i) {
    if (f.u[i] > 0) acc = log_add_exp(acc, std::log(f.u[i]) + g.log_vol[i]);
    if (f.u[i] > eps) d.support_radius = g.r[i];
  }
  d.mass = g.omega * std::exp(acc);
  d.volume = d.support_radius > 0 ? g.omega * std::exp(g.log_mass(0.0, d.support_radius)) : 0.0;
  return d;
}

}  // namespace pmelab
