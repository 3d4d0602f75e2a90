#include "pmelab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "pmelab/chvar.hpp"
#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

namespace fs = std::filesystem;

namespace {

std::atomic<int> g_level{static_cast<int>(LogLevel::warn)};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path.string() + "'");
  out << text;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw SchemaError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

bool qh(RegimeKind k) { return k == RegimeKind::qh_subcritical || k == RegimeKind::qh_critical; }

}  // namespace

LogLevel log_level_from_string(const std::string& s) {
  if (s == "error") return LogLevel::error;
  if (s == "warn") return LogLevel::warn;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  throw SchemaError("unknown log level '" + s + "'");
}

void set_log_level(LogLevel l) { g_level = static_cast<int>(l); }

void log_msg(LogLevel l, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (static_cast<int>(l) <= g_level) std::cerr << "[" << names[static_cast<int>(l)] << "] " << msg << "\n";
}

RegimeKind detect_regime(const ModelFunction& psi) {
  const auto& a = psi.asymptotics();
  switch (a.growth) {
    case GrowthClass::linear: return RegimeKind::qe_subcritical;
    case GrowthClass::power: return RegimeKind::qe_critical;
    case GrowthClass::exponential:
      if (a.mu > 1) throw NotApplicableError("geometry with mu > 1: no barrier family or prediction");
      if (a.mu == 1) return RegimeKind::qh_critical;
      if (a.mu <= -1) throw ConstraintError("mu>-1", "exponential growth class with mu <= -1");
      return RegimeKind::qh_subcritical;
  }
  return RegimeKind::qe_subcritical;
}

RegimeKind resolve_regime(const ExperimentConfig& c, const ModelFunction& psi) {
  const RegimeKind k = detect_regime(psi);
  if (c.verify.regime != "auto" && regime_kind_from_string(c.verify.regime) != k)
    throw ConstraintError("regime", "config asks for " + c.verify.regime + " but the geometry is " + to_string(k));
  if (k == RegimeKind::weighted) throw NotApplicableError("weighted regime is not reachable from a geometry");
  return k;
}

Comparison comparison_profiles(const ModelFunction& psi) {
  Comparison c;
  const auto& a = psi.asymptotics();
  c.mu = a.mu;
  c.R = psi.r_bar() > 0 ? psi.r_bar() : (psi.profile() ? psi.profile()->R : 1.0);
  const double r_lim = std::min(psi.r_max(), 50 * std::max(c.R, 1.0));
  const auto up1 = CurvatureProfile::upper(1.0, c.mu, c.R);
  double q_up = std::numeric_limits<double>::infinity();
  double q_lo = 0.0, d = 0.0;
  for (double r : geomspace(1e-3, r_lim, 4000)) {
    const double w = psi.sample(r).w;
    if (r > c.R * (1 + 1e-9)) {
      q_up = std::min(q_up, w / up1.w(r));
      q_lo = std::max(q_lo, w / std::pow(r, 2 * c.mu));
    } else {
      d = std::max(d, w);
    }
  }
  if (!(q_up > 0) || !std::isfinite(q_up))
    throw ConstraintError("curvature", "geometry curvature does not dominate a comparison profile beyond R");
  c.Q_up = q_up;
  c.psi_up = solve_psi_from_curvature(CurvatureProfile::upper(c.Q_up, c.mu, c.R), psi.r_max(), psi.n());
  if (c.mu >= 0 && c.mu <= 1) {
    c.Q_lo = q_lo;
    c.D = std::max(d, q_lo * std::pow(c.R, 2 * c.mu));
    c.psi_lo = solve_psi_from_curvature(CurvatureProfile::lower(c.Q_lo, c.mu, c.R, c.D), psi.r_max(), psi.n());
  }
  return c;
}

namespace {

void qe_params(const ModelFunction& psi, double& mu, double& Q) {
  const auto& a = psi.asymptotics();
  if (a.growth == GrowthClass::power) {
    mu = -1;
    Q = a.q * (a.q - 1);
  } else {
    mu = -2;  // any mu < -1: Euclidean exponents
    Q = 0;
  }
}

}  // namespace

BarrierSpec build_upper(RegimeKind regime, const ModelFunction& psi, const Comparison& cmp, double m,
                        const DatumStats& datum) {
  const int n = psi.n();
  switch (regime) {
    case RegimeKind::qh_subcritical:
      return upper_qh_subcritical(n, m, cmp.mu, cmp.Q_up, cmp.R, *cmp.psi_up, datum);
    case RegimeKind::qh_critical: return upper_qh_critical(n, m, cmp.Q_up, cmp.R, *cmp.psi_up, datum);
    // psi'/psi >= 1/r on any Cartan-Hadamard model, so the n-dimensional profile is a supersolution.
    // The n_q profile is only a subsolution here (drift <= (n_q - 1)/r).
    case RegimeKind::qe_critical:
    case RegimeKind::qe_subcritical: return barenblatt_qe(n, m, -2, 0, datum, true);
    case RegimeKind::weighted: break;
  }
  throw NotApplicableError("no upper barrier for regime " + to_string(regime));
}

BarrierSpec build_lower(RegimeKind regime, const ModelFunction& psi, const Comparison& cmp, double m,
                        const DatumStats& datum) {
  const int n = psi.n();
  if (qh(regime) && !cmp.psi_lo) throw NotApplicableError("lower qh barrier needs mu in [0, 1]");
  switch (regime) {
    case RegimeKind::qh_subcritical:
      return lower_qh_subcritical(n, m, cmp.mu, cmp.Q_lo, cmp.R, cmp.D, *cmp.psi_lo, datum);
    case RegimeKind::qh_critical: return lower_qh_critical(n, m, cmp.Q_lo, cmp.R, cmp.D, *cmp.psi_lo, datum);
    case RegimeKind::qe_critical:
    case RegimeKind::qe_subcritical: {
      double mu, Q;
      qe_params(psi, mu, Q);
      return barenblatt_qe(n, m, mu, Q, datum, false);
    }
    case RegimeKind::weighted: break;
  }
  throw NotApplicableError("no lower barrier for regime " + to_string(regime));
}

LowerChoice choose_lower(const Trajectory& traj, RegimeKind regime, const ModelFunction& psi,
                         const Comparison& cmp, double m, double threshold) {
  LowerChoice ch;
  const Grid& g = *traj.grid;
  auto inf_on = [&](const TrajectorySample& s, double radius) {
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.nodes() && g.r[i] <= radius; ++i) inf = std::min(inf, s.u[i]);
    return inf;
  };
  try {
    (void)build_lower(regime, psi, cmp, m, DatumStats{0, 0, 0, 0});
    throw NumericalError("lower constructor accepted a zero datum");
  } catch (const WaitingRequired& w) {
    ch.R_required = w.required_radius();
  }
  const auto wt = waiting_time(traj, ch.R_required, threshold);
  if (!wt.found) return ch;
  ch.t_wait = wt.t;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = wt.sample; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    const double inf = inf_on(s, ch.R_required);
    if (!(inf > 0)) continue;
    auto spec = build_lower(regime, psi, cmp, m, DatumStats{0, 0, inf, ch.R_required});
    if (!ch.found || spec.log_t0 < best - 1e-12 * std::fabs(best)) {
      best = spec.log_t0;
      spec.time_origin = s.t;
      ch.spec = spec;
      ch.sample = k;
      ch.inf = inf;
      ch.found = true;
    }
  }
  return ch;
}

bool PipelineResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

int PipelineResult::exit_code() const { return ok() ? 0 : 1; }

std::string PipelineResult::summary() const {
  std::ostringstream os;
  os << "regime = " << to_string(regime) << "\n";
  for (const auto& c : checks) os << (c.ok ? "PASS " : "FAIL ") << c.name << " : " << c.detail << "\n";
  os << "status = " << (ok() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

void write_residuals_csv(const std::vector<BarrierSpec>& specs, const std::vector<ResidualReport>& reps,
                         const std::string& path) {
  CsvWriter csv(path, {"spec", "verdict", "sampled", "violations", "unresolved", "worst", "worst_r", "worst_t"});
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    csv.row_cells({to_string(specs[i].regime), to_string(r.verdict), static_cast<long long>(r.sampled),
                   static_cast<long long>(r.violations), static_cast<long long>(r.unresolved), r.worst, r.worst_r,
                   r.worst_t});
  }
}

void stage_geometry(const ExperimentConfig& c, const std::string& out_dir) {
  const auto psi = build_geometry(c.geometry);
  const auto dir = ensure_dir(out_dir);
  write_psi_csv(psi, (dir / "psi.csv").string(), 2000);
  const auto& a = psi.asymptotics();
  std::ostringstream os;
  os << "kind = " << to_string(psi.kind()) << "\nn = " << psi.n() << "\nr_max = " << format_double(psi.r_max())
     << "\nr_bar = " << format_double(psi.r_bar()) << "\nmu = " << format_double(a.mu)
     << "\nQ = " << format_double(a.Q) << "\nq = " << format_double(a.q) << "\n";
  write_text(dir / "geometry.txt", os.str());
}

void stage_transform(const ExperimentConfig& c, const std::string& out_dir) {
  const auto psi = build_geometry(c.geometry);
  const auto dir = ensure_dir(out_dir);
  const auto cov = psi.n() >= 3 ? forward_map(psi, psi.n()) : log_map_2d(psi);
  write_rho_csv(cov, (dir / "rho.csv").string());
}

Trajectory stage_simulate(const ExperimentConfig& c, const ModelFunction& psi, const std::string& out_dir,
                          double R_max_hint) {
  const auto& run = c.run;
  double R_max = run.R_max > 0 ? run.R_max : R_max_hint;
  if (!(R_max > 0)) throw ConstraintError("run.R_max", "no R_max given and no upper barrier to size the domain");
  if (!psi.evaluable_beyond_range()) R_max = std::min(R_max, psi.r_max());
  R_max = std::max(R_max, 2 * c.pde.support);
  auto grid = std::make_shared<Grid>(make_grid(R_max, run.N, run.grading, manifold_measure(psi)));
  const auto u0 = make_datum(grid, c.pde.datum, c.pde.support, c.pde.sup);
  SolverOptions o;
  o.integrator = run.integrator;
  o.cfl = run.cfl;
  o.time_accuracy = run.time_accuracy;
  o.store_fields = run.store_fields;
  log_msg(LogLevel::info, "simulate: R_max = " + format_double(R_max) + ", N = " + std::to_string(run.N));
  auto traj = evolve(u0, c.pde.m, geometric_schedule(run.t_first, run.T, run.samples), o);
  log_msg(LogLevel::info, "simulate: " + std::to_string(traj.steps) + " steps, " +
                              std::to_string(traj.stage_evaluations) + " stage evaluations");
  const auto dir = ensure_dir(out_dir);
  write_trajectory_csv(traj, (dir / "traj.csv").string());
  if (c.output.fields && run.store_fields)
    write_fields_csv(traj, (dir / "fields.csv").string(), c.output.fields_stride);
  return traj;
}

std::vector<BarrierSpec> read_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("missing barrier file '" + path + "'");
  std::vector<BarrierSpec> out;
  std::string line, block;
  auto flush = [&] {
    if (block.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(parse_spec_dump(block));
    block.clear();
  };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
    } else {
      block += line + "\n";
    }
  }
  flush();
  if (out.empty()) throw SchemaError("barrier file '" + path + "' holds no spec");
  return out;
}

std::vector<ResidualReport> stage_verify_barriers(const ExperimentConfig& c, const std::vector<BarrierSpec>& specs,
                                                  const std::string& out_dir) {
  const auto psi = build_geometry(c.geometry);
  const auto op = manifold_operator(psi);
  std::vector<ResidualReport> reps;
  for (const auto& s : specs) {
    const double T = std::max(c.run.T - s.time_origin, 1.0);
    const auto times = residual_times(T, c.verify.residual_times);
    reps.push_back(residual(s, op, residual_grid(s, times, c.verify.residual_points), times, false,
                            c.verify.residual_tol));
    log_msg(LogLevel::info, "residual " + to_string(s.regime) + ": " + to_string(reps.back().verdict));
  }
  write_residuals_csv(specs, reps, (ensure_dir(out_dir) / "residual.csv").string());
  return reps;
}

ExponentFit stage_fit(const std::string& traj_csv, double m, const std::optional<RegimePrediction>& pred,
                      const std::string& out_dir, double window, bool append) {
  if (!fs::exists(traj_csv)) throw SchemaError("missing trajectory file '" + traj_csv + "'");
  const auto tab = read_csv(traj_csv);
  const auto fit = fit_exponents(tab.column("t"), tab.column("sup_norm"), m, window);
  const auto dir = ensure_dir(out_dir);
  std::string text = fit.to_text();
  if (pred) {
    if (!append) fs::remove(dir / "fits.csv");
    append_fit_row((dir / "fits.csv").string(), to_string(pred->kind), *pred, fit);
    text += pred->to_text();
  }
  write_text(dir / "fit.txt", text);
  return fit;
}

PipelineResult run_pipeline(const ExperimentConfig& c, const std::string& out_dir) {
  const auto dir = ensure_dir(out_dir);
  PipelineResult res;
  const auto psi = build_geometry(c.geometry);
  if (c.output.psi) write_psi_csv(psi, (dir / "psi.csv").string(), 2000);
  if (c.output.rho) stage_transform(c, out_dir);
  res.regime = resolve_regime(c, psi);
  log_msg(LogLevel::info, "regime " + to_string(res.regime));

  const double m = c.pde.m;
  const auto datum = datum_stats(c.pde.datum, c.pde.support, c.pde.sup);
  const bool want_upper = std::count(c.verify.barriers.begin(), c.verify.barriers.end(), "upper") > 0;
  const bool want_lower = std::count(c.verify.barriers.begin(), c.verify.barriers.end(), "lower") > 0;

  std::optional<Comparison> cmp;
  if (qh(res.regime)) cmp = comparison_profiles(psi);
  const Comparison empty{};
  const Comparison& cref = cmp ? *cmp : empty;
  std::optional<BarrierSpec> upper;
  try {
    upper = build_upper(res.regime, psi, cref, m, datum);
  } catch (const ConstraintError&) {
    if (want_upper) throw;
  }

  const auto op = manifold_operator(psi);
  auto verify_spec = [&](const BarrierSpec& s) {
    const double T = std::max(c.run.T - s.time_origin, 1.0);
    const auto times = residual_times(T, c.verify.residual_times);
    auto rep = residual(s, op, residual_grid(s, times, c.verify.residual_points), times, false, c.verify.residual_tol);
    res.checks.push_back({"residual " + to_string(s.regime), rep.verdict == Verdict::pass,
                          to_string(rep.verdict) + ", " + std::to_string(rep.violations) + " violations of " +
                              std::to_string(rep.sampled)});
    res.specs.push_back(s);
    res.residuals.push_back(std::move(rep));
  };
  if (want_upper && upper) verify_spec(*upper);

  const double hint = upper ? 1.1 * support_radius(*upper, c.run.T) : 0.0;
  const auto traj = stage_simulate(c, psi, out_dir, hint);
  res.checks.push_back({"mass", std::fabs(traj.samples.back().diag.mass / traj.initial_mass - 1) < 1e-3,
                        "relative drift " + format_double(traj.samples.back().diag.mass / traj.initial_mass - 1)});
  if (traj.domain_exhausted)
    res.checks.push_back({"domain", false, "support reached the wall at t = " + format_double(traj.exhausted_at)});

  std::optional<BarrierSpec> lower;
  if (want_lower) {
    if (qh(res.regime)) {
      const auto ch = choose_lower(traj, res.regime, psi, cref, m, c.verify.waiting_threshold * c.pde.sup);
      if (ch.found) {
        lower = ch.spec;
        log_msg(LogLevel::info, "lower barrier from t = " + format_double(ch.spec.time_origin) + " (waiting time " +
                                    format_double(ch.t_wait) + ")");
      } else if (ch.t_wait > 0) {
        res.checks.push_back({"waiting time", false, "no admissible lower spec after t = " + format_double(ch.t_wait)});
      } else {
        res.checks.push_back({"waiting time", false,
                              "solution never positive on B_" + format_double(ch.R_required) + " up to T"});
      }
    } else {
      lower = build_lower(res.regime, psi, cref, m, datum);
    }
    if (lower) verify_spec(*lower);
  }

  std::ostringstream dump;
  for (std::size_t i = 0; i < res.specs.size(); ++i) dump << (i ? "\n" : "") << res.specs[i].dump();
  write_text(dir / "barriers.txt", dump.str());
  if (!res.specs.empty()) write_residuals_csv(res.specs, res.residuals, (dir / "residual.csv").string());

  if (c.verify.sandwich && upper && want_upper && c.run.store_fields) {
    const double t_start = lower ? lower->time_origin : std::numeric_limits<double>::infinity();
    res.sandwich = sandwich_check(traj, lower ? &*lower : nullptr, *upper, t_start);
    write_text(dir / "sandwich.txt", res.sandwich->to_text());
    res.checks.push_back({"sandwich", res.sandwich->pass(),
                          std::to_string(res.sandwich->upper_violations) + " upper and " +
                              std::to_string(res.sandwich->lower_violations) + " lower violations of " +
                              std::to_string(res.sandwich->checked)});
  }

  if (c.verify.fit) {
    double param = 0;
    if (qh(res.regime)) param = psi.asymptotics().mu;
    if (res.regime == RegimeKind::qe_critical) param = psi.asymptotics().q * (psi.asymptotics().q - 1);
    res.prediction = predict(res.regime, psi.n(), m, param);
    res.fit = stage_fit((dir / "traj.csv").string(), m, res.prediction, out_dir, c.verify.fit_window);
    const auto mf = matched_fit(*res.fit, *res.prediction);
    if (c.verify.alpha_tol > 0)
      res.checks.push_back({"alpha", std::fabs(mf.alpha - res.prediction->alpha) <= c.verify.alpha_tol,
                            "fit " + format_double(mf.alpha) + " vs " + format_double(res.prediction->alpha)});
    if (c.verify.beta_tol > 0)
      res.checks.push_back({"beta", std::fabs(mf.beta - res.prediction->beta) <= c.verify.beta_tol,
                            "fit " + format_double(mf.beta) + " vs " + format_double(res.prediction->beta)});
  }
  write_text(dir / "summary.txt", res.summary());
  return res;
}

}  // namespace pmelab
