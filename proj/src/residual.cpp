#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmelab/barriers.hpp"
#include "pmelab/csv.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    default:
      return "UNRESOLVED";
  }
}

ResidualOperator manifold_operator(const ModelFunction& psi) {
  ResidualOperator op;
  op.drift = [psi](double r) { return psi.drift(r); };
  return op;
}

ResidualOperator weighted_operator(const WeightProfile& rho, double s_min) {
  ResidualOperator op;
  const double n1 = rho.dimension() - 1;
  op.drift = [n1](double s) { return n1 / s; };
  op.weight = [rho](double s) { return rho.rho(s); };
  op.r_min = s_min;
  return op;
}

ResidualReport residual(const BarrierSpec& spec, const ResidualOperator& op, const std::vector<double>& grid,
                        const std::vector<double>& times, bool keep_field, double tol) {
  ResidualReport rep;
  const bool upper = is_upper(spec.regime);
  const double m = spec.m;
  rep.worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const auto kinks = kink_radii(spec, t);
    auto V = [&](double x) { return std::pow(evaluate(spec, x, t), m); };
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double r = grid[j];
      const double h = j > 0 ? r - grid[j - 1] : grid[1] - grid[0];
      if (r < 2 * h || r < op.r_min + 2 * h) continue;
      bool near_kink = false;
      for (double k : kinks) near_kink = near_kink || std::fabs(r - k) <= 2 * h * (1 + 1e-9);
      if (near_kink) continue;
      const double u = evaluate(spec, r, t);
      if (u <= 0) continue;
      const double v0 = V(r - 2 * h), v1 = V(r - h), v2 = V(r), v3 = V(r + h), v4 = V(r + 2 * h);
      const double d1_4 = (v0 - 8 * v1 + 8 * v3 - v4) / (12 * h);
      const double d2_4 = (-v0 + 16 * v1 - 30 * v2 + 16 * v3 - v4) / (12 * h * h);
      const double d1_2 = (v3 - v1) / (2 * h);
      const double d2_2 = (v3 - 2 * v2 + v1) / (h * h);
      const double w = op.weight ? op.weight(r) : 1.0;
      const double wut = w * evaluate_dt(spec, r, t);
      const double d = op.drift(r);
      const double res4 = wut - d2_4 - d * d1_4;
      const double res2 = wut - d2_2 - d * d1_2;
      const double scale = std::max({std::fabs(wut), std::fabs(d2_4), std::fabs(d * d1_4)});
      ++rep.sampled;
      if (keep_field) rep.field.push_back({r, t, res4, scale});
      const double adverse = (upper ? -res4 : res4) / scale;
      if (adverse > rep.worst) rep.worst = adverse, rep.worst_r = r, rep.worst_t = t;
      if (adverse > tol) {
        const bool resolved = std::fabs(res4 - res2) <= 0.5 * std::fabs(res4) + tol * scale;
        if (resolved) {
          ++rep.violations;
        } else {
          ++rep.unresolved;
        }
      }
    }
  }
  if (rep.sampled == 0) rep.worst = 0.0;
  rep.verdict = rep.violations > 0 ? Verdict::fail : (rep.unresolved > 0 ? Verdict::unresolved : Verdict::pass);
  return rep;
}

std::string ResidualReport::to_text() const {
  std::ostringstream os;
  os << "verdict = " << to_string(verdict) << "\nsampled = " << sampled << "\nviolations = " << violations
     << "\nunresolved = " << unresolved << "\nworst = " << format_double(worst) << "\nworst_r = "
     << format_double(worst_r) << "\nworst_t = " << format_double(worst_t) << "\n";
  return os.str();
}

std::vector<double> residual_times(double T, int count) {
  std::vector<double> ts{0.0};
  if (T <= 0) return ts;
  const double lo = std::min(1e-2, T / 10);
  for (double t : geomspace(lo, T, count - 1)) ts.push_back(t);
  return ts;
}

std::vector<double> residual_grid(const BarrierSpec& spec, const std::vector<double>& times, int N) {
  double top = 0.0;
  for (double t : times) top = std::max(top, support_radius(spec, t));
  const bool weighted = spec.regime == Regime::weighted_upper || spec.regime == Regime::weighted_lower ||
                        spec.regime == Regime::weighted_critical_upper ||
                        spec.regime == Regime::weighted_critical_lower;
  if (weighted) {
    const double lo = spec.s_min;
    const double hi = std::min(std::max(1.05 * top, 2 * lo), 1e300);
    return geomspace(lo, hi, N);
  }
  return linspace(0.0, 1.05 * top, N);
}

void write_residual_csv(const ResidualReport& rep, const std::string& path) {
  CsvWriter csv(path, {"r", "t", "residual", "scale"});
  for (const auto& p : rep.field) csv.row({p.r, p.t, p.residual, p.scale});
}

}  // namespace pmelab
