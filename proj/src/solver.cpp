#include "pmelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

std::string to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rkl2"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return Integrator::euler;
  if (s == "rkl2") return Integrator::rkl2;
  throw SchemaError("unknown integrator '" + s + "'");
}

std::vector<double> geometric_schedule(double t_first, double T, int count) {
  if (!(t_first > 0) || !(T > t_first) || count < 2)
    throw ConstraintError("schedule", "need 0 < t_first < T and at least two samples");
  return geomspace(t_first, T, count);
}

namespace {

std::size_t last_positive(const std::vector<double>& u) {
  for (std::size_t i = u.size(); i-- > 0;)
    if (u[i] > 0) return i;
  return std::numeric_limits<std::size_t>::max();
}

// RKL2 coefficients b_j.
double rkl_b(int j) { return j < 2 ? 1.0 / 3.0 : (j * j + j - 2.0) / (2.0 * j * (j + 1.0)); }

}  // namespace

Trajectory evolve(const RadialField& u0, double m, const std::vector<double>& times, const SolverOptions& o) {
  if (!(m > 1)) throw ConstraintError("m>1", "m = " + std::to_string(m));
  const Grid& g = *u0.grid;
  const std::size_t N = g.nodes() - 1;  // unknowns 0..N-1, node N is the wall
  if (u0.u.size() != g.nodes()) throw ConstraintError("field size", "datum does not match the grid");
  for (double v : u0.u)
    if (!(v >= 0) || !std::isfinite(v)) throw ConstraintError("u0>=0", "datum must be finite and nonnegative");
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < u0.t || (k > 0 && times[k] <= times[k - 1]))
      throw ConstraintError("sample times", "times must increase and start after the datum time");

  using namespace kernels;
  auto rhs = o.parallel ? flux_rhs_parallel : flux_rhs_serial;
  auto fe_dt = o.parallel ? euler_dt_parallel : euler_dt_serial;
  auto fe_step = o.parallel ? euler_step_parallel : euler_step_serial;
  auto stage = o.parallel ? rkl2_stage_parallel : rkl2_stage_serial;

  Trajectory tr;
  tr.grid = u0.grid;
  std::vector<double> u = u0.u;
  u[N] = 0.0;
  RadialField cur{u0.grid, u, u0.t};
  tr.initial_mass = diagnostics(cur, o.eps_support).mass;

  std::vector<double> y0(N + 1), L0(N + 1, 0.0), b1(N + 1, 0.0), b2(N + 1, 0.0), b3(N + 1, 0.0);
  double t = u0.t;
  std::size_t k = 0;
  double shrink = 1.0;  // Δt reduction after a rejected step
  int halvings = 0;

  auto record = [&](double ts) {
    TrajectorySample smp;
    smp.t = ts;
    cur.u = u;
    cur.t = ts;
    smp.diag = diagnostics(cur, o.eps_support);
    if (o.store_fields) smp.u = u;
    tr.samples.push_back(std::move(smp));
  };

  while (k < times.size()) {
    if (times[k] - t <= 1e-12 * std::max(1.0, std::fabs(t))) {
      record(times[k]);
      t = times[k];
      ++k;
      continue;
    }
    const std::size_t lp = last_positive(u);
    if (lp == std::numeric_limits<std::size_t>::max()) {  // u == 0 stays 0
      t = times[k];
      continue;
    }
    if (lp + 1 >= N) {
      tr.domain_exhausted = true;
      tr.exhausted_at = t;
      break;
    }
    const std::size_t end0 = std::min(N, lp + 2);
    const double dt_fe = o.cfl * shrink * fe_dt(g, m, u.data(), end0);
    const double target = std::min(times[k] - t, std::max(o.time_accuracy * t, dt_fe));
    std::copy(u.begin(), u.begin() + static_cast<long>(end0) + 1, y0.begin());
    double tau;
    std::size_t end_final;
    if (o.integrator == Integrator::euler || target <= dt_fe) {
      tau = std::min(target, dt_fe);
      fe_step(g, m, tau, y0.data(), u.data(), end0);
      end_final = end0;
      ++tr.stage_evaluations;
    } else {
      int s = static_cast<int>(std::ceil(0.5 * (-1 + std::sqrt(9 + 16 * target / dt_fe))));
      s = std::clamp(s, 2, o.max_stages);
      tau = std::min(target, dt_fe * (s * s + s - 2) / 4.0);
      const std::size_t reach = std::min(N, lp + s + 3);
      std::fill(b1.begin(), b1.begin() + static_cast<long>(reach), 0.0);
      std::fill(b2.begin(), b2.begin() + static_cast<long>(reach), 0.0);
      std::fill(b3.begin(), b3.begin() + static_cast<long>(reach), 0.0);
      std::fill(y0.begin() + static_cast<long>(end0), y0.begin() + static_cast<long>(reach), 0.0);
      const double w1 = 4.0 / (s * s + s - 2.0);
      rhs(g, m, y0.data(), L0.data(), end0);
      std::fill(L0.begin() + static_cast<long>(end0), L0.begin() + static_cast<long>(reach), 0.0);
      // Y1 = Y0 + b1 w1 tau L0
      double* ym2 = y0.data();
      double* ym1 = b1.data();
      for (std::size_t i = 0; i < end0; ++i) ym1[i] = y0[i] + rkl_b(1) * w1 * tau * L0[i];
      double* out = b2.data();
      double* spare = b3.data();
      std::size_t end = end0;
      for (int j = 2; j <= s; ++j) {
        end = std::min(N, lp + j + 1);
        StageCoefficients c{};
        c.mu = (2.0 * j - 1) / j * rkl_b(j) / rkl_b(j - 1);
        c.nu = -(j - 1.0) / j * rkl_b(j) / rkl_b(j - 2);
        c.mu_t = c.mu * w1;
        c.gamma_t = -(1 - rkl_b(j - 1)) * c.mu_t;
        c.tau = tau;
        stage(g, m, c, y0.data(), ym1, ym2, L0.data(), out, end);
        // rotate: ym2 <- ym1, ym1 <- out, out <- a buffer not in use
        double* old_ym2 = ym2;
        ym2 = ym1;
        ym1 = out;
        out = (old_ym2 == y0.data()) ? spare : old_ym2;
        spare = nullptr;
      }
      std::copy(ym1, ym1 + end, u.begin());
      end_final = end;
      tr.stage_evaluations += s;
    }
    // Reject on non-finite or clearly negative values; clip round-off undershoots.
    double sup = 0.0;
    bool bad = false;
    for (std::size_t i = 0; i < end_final; ++i) {
      if (!std::isfinite(u[i])) bad = true;
      sup = std::max(sup, u[i]);
    }
    double clipped = 0.0;
    for (std::size_t i = 0; i < end_final && !bad; ++i) {
      if (u[i] < 0) {
        if (u[i] < -1e-6 * sup) bad = true;
        clipped += -u[i] * std::exp(g.log_vol[i]) * g.omega;
      }
    }
    if (bad) {
      std::copy(y0.begin(), y0.begin() + static_cast<long>(end0), u.begin());
      std::fill(u.begin() + static_cast<long>(end0), u.begin() + static_cast<long>(end_final), 0.0);
      shrink *= 0.5;
      if (++halvings > o.max_halvings)
        throw NumericalError("evolve: step rejected " + std::to_string(halvings) + " times at t = " +
                             std::to_string(t));
      continue;
    }
    for (std::size_t i = 0; i < end_final; ++i) u[i] = std::max(u[i], 0.0);
    tr.clipped_mass += clipped;
    shrink = std::min(1.0, shrink * 2);
    t += tau;
    ++tr.steps;
  }
  return tr;
}

std::string SandwichReport::to_text() const {
  std::ostringstream os;
  os << "checked = " << checked << "\nlower_violations = " << lower_violations
     << "\nupper_violations = " << upper_violations << "\nworst_lower = " << format_double(worst_lower)
     << "\nworst_lower_t = " << format_double(worst_lower_t) << "\nworst_upper = " << format_double(worst_upper)
     << "\nworst_upper_t = " << format_double(worst_upper_t) << "\nt_start = " << format_double(t_start)
     << "\nr_floor = " << format_double(r_floor) << "\nlower_vacuous = " << (lower_vacuous ? 1 : 0) << "\n";
  return os.str();
}

SandwichReport sandwich_check(const Trajectory& traj, const BarrierSpec* lower, const BarrierSpec& upper,
                              double t_start) {
  SandwichReport rep;
  rep.t_start = t_start;
  rep.lower_vacuous = lower == nullptr || !std::isfinite(t_start);
  if (lower && lower->n != upper.n) throw ConstraintError("sandwich", "specs built for different dimensions");
  rep.r_floor = std::max(upper.R0, lower ? lower->R0 : 0.0);
  rep.worst_lower = rep.worst_upper = -std::numeric_limits<double>::infinity();
  const Grid& g = *traj.grid;
  const std::size_t N = g.nodes() - 1;
  for (const auto& smp : traj.samples) {
    if (smp.u.empty()) throw ConstraintError("sandwich", "trajectory was recorded without fields");
    const bool check_upper = smp.t >= upper.time_origin;
    const bool check_lower = !rep.lower_vacuous && smp.t >= t_start && smp.t >= lower->time_origin;
    if (!check_upper && !check_lower) continue;
    for (std::size_t i = 1; i < N; ++i) {
      const double r = g.r[i];
      if (r < rep.r_floor) continue;
      const double u = smp.u[i];
      const double delta = 2 * std::max(std::fabs(smp.u[i + 1] - u), std::fabs(u - smp.u[i - 1]));
      ++rep.checked;
      if (check_upper) {
        const double ex = u - evaluate(upper, r, smp.t - upper.time_origin) - delta;
        if (ex > rep.worst_upper) rep.worst_upper = ex, rep.worst_upper_t = smp.t;
        if (ex > 0) ++rep.upper_violations;
      }
      if (check_lower) {
        const double ex = evaluate(*lower, r, smp.t - lower->time_origin) - delta - u;
        if (ex > rep.worst_lower) rep.worst_lower = ex, rep.worst_lower_t = smp.t;
        if (ex > 0) ++rep.lower_violations;
      }
    }
  }
  return rep;
}

WaitingReport waiting_time(const Trajectory& traj, double radius, double threshold) {
  WaitingReport w;
  const Grid& g = *traj.grid;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& smp = traj.samples[k];
    if (smp.u.empty()) continue;
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.nodes() && g.r[i] <= radius; ++i) inf = std::min(inf, smp.u[i]);
    if (inf > threshold) {
      w.found = true;
      w.t = smp.t;
      w.inf = inf;
      w.sample = k;
      return w;
    }
  }
  return w;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  CsvWriter csv(path, {"t", "sup_norm", "support_radius", "mass", "volume"});
  for (const auto& s : traj.samples)
    csv.row({s.t, s.diag.sup_norm, s.diag.support_radius, s.diag.mass, s.diag.volume});
}

void write_fields_csv(const Trajectory& traj, const std::string& path, int stride) {
  CsvWriter csv(path, {"t", "r", "u"});
  const Grid& g = *traj.grid;
  for (const auto& s : traj.samples) {
    if (s.u.empty()) continue;
    for (std::size_t i = 0; i < g.nodes(); i += static_cast<std::size_t>(std::max(1, stride)))
      csv.row({s.t, g.r[i], s.u[i]});
  }
}

}  // namespace pmelab
