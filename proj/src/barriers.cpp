#include "pmelab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

namespace {

const char* kRegimeNames[] = {
    "qh_subcritical_upper", "qh_subcritical_lower", "qh_critical_upper",       "qh_critical_lower",
    "qe_barenblatt_upper",  "qe_barenblatt_lower",  "weighted_upper",          "weighted_lower",
    "weighted_critical_upper", "weighted_critical_lower",
};

bool is_subcritical(Regime r) { return r == Regime::qh_subcritical_upper || r == Regime::qh_subcritical_lower; }
bool is_critical(Regime r) { return r == Regime::qh_critical_upper || r == Regime::qh_critical_lower; }
bool is_barenblatt(Regime r) { return r == Regime::qe_barenblatt_upper || r == Regime::qe_barenblatt_lower; }
bool is_weighted(Regime r) { return r == Regime::weighted_upper || r == Regime::weighted_lower; }
bool is_weighted_critical(Regime r) {
  return r == Regime::weighted_critical_upper || r == Regime::weighted_critical_lower;
}

// log(t + t0) without forming t0.
double log_tau(const BarrierSpec& s, double t) { return s.log_t0 + std::log1p(t * std::exp(-s.log_t0)); }

// U = pref * phi_+^p and dU/dt = dpref * phi^p + p * pref * phi^{p-1} * dphi.
struct Shape {
  double pref, dpref, phi, dphi;
};

Shape shape(const BarrierSpec& s, double r, double t) {
  const double p = s.p();
  const double L = log_tau(s, t);
  const double inv_tau = std::exp(-L);
  Shape out{};
  if (is_subcritical(s.regime)) {
    const double e = (1 - s.mu) / (1 + s.mu);
    const double g = r >= s.R0 ? std::pow(r, 1 - s.mu)
                               : (1 - s.mu) * r * r / (2 * std::pow(s.R0, 1 + s.mu)) +
                                     0.5 * (1 + s.mu) * std::pow(s.R0, 1 - s.mu);
    out.pref = s.C * std::exp(-p * L);
    out.dpref = -p * out.pref * inv_tau;
    out.phi = s.gamma * std::pow(L, e) - g;
    out.dphi = s.gamma * e * std::pow(L, e - 1) * inv_tau;
  } else if (is_critical(s.regime)) {
    const double g = r >= s.R0 ? std::log(r) : r * r / (2 * s.R0 * s.R0) + std::log(s.R0) - 0.5;
    out.pref = s.kappa * std::exp(-p * L);
    out.dpref = -p * out.pref * inv_tau;
    out.phi = s.eta + 0.5 * std::log(L) - g;
    out.dphi = inv_tau / (2 * L);
  } else if (is_barenblatt(s.regime)) {
    const double b = 1.0 / (2 + s.n_q * (s.m - 1));
    const double a = s.n_q * b;
    const double shrink = std::exp(-2 * b * L);
    out.pref = s.C * std::exp(-a * L);
    out.dpref = -a * out.pref * inv_tau;
    out.phi = s.gamma - r * r * shrink;
    out.dphi = 2 * b * r * r * shrink * inv_tau;
  } else if (is_weighted(s.regime)) {
    const double sigma = std::log(std::max(r, s.s_min));
    out.pref = s.C * std::exp(-p * L);
    out.dpref = -p * out.pref * inv_tau;
    out.phi = s.gamma * std::pow(L, 1 - s.nu) - std::pow(sigma, 1 - s.nu);
    out.dphi = s.gamma * (1 - s.nu) * std::pow(L, -s.nu) * inv_tau;
  } else {
    const double sigma = std::log(std::max(r, s.s_min));
    out.pref = s.C * std::exp(-p * L);
    out.dpref = -p * out.pref * inv_tau;
    out.phi = s.eta + std::log(L) - std::log(sigma);
    out.dphi = inv_tau / L;
  }
  return out;
}

void require(bool ok, const std::string& constraint, const std::string& detail) {
  if (!ok) throw ConstraintError(constraint, detail);
}

void check_common(int n, double m, const DatumStats& d, bool upper) {
  require(n >= 2, "n>=2", "dimension " + std::to_string(n));
  require(m > 1, "m>1", "m = " + std::to_string(m));
  if (upper) {
    require(d.support > 0 && d.sup > 0 && std::isfinite(d.support) && std::isfinite(d.sup), "datum_stats",
            "upper specs need a positive support radius and sup");
  } else {
    require(d.inf >= 0 && d.inf_radius >= 0, "datum_stats", "negative inf or radius");
  }
}

// f(r) = drift/r^mu - mu/r^{1+mu}.
double r0_function(const ModelFunction& psi, double mu, double r) {
  return psi.drift(r) / std::pow(r, mu) - mu / std::pow(r, 1 + mu);
}

double search_R0(const ModelFunction& psi, double mu, double target, bool upper, double R, double mono_floor,
                 double margin) {
  for (int j = 0; j <= 400; ++j) {
    const double r = R * std::exp2(j / 8.0);
    if (4 * r > psi.r_max() && !psi.evaluable_beyond_range())
      throw RangeError("R0 search exceeds r_max = " + std::to_string(psi.r_max()) +
                       "; sample the geometry further");
    if (std::pow(r, 1 + mu) < mono_floor) continue;
    bool ok = true;
    for (int i = 0; i <= 64 && ok; ++i) {
      const double x = r * (1 + 3.0 * i / 64);
      const double f = r0_function(psi, mu, x);
      ok = upper ? f >= target * (1 + margin) : f <= target / (1 + margin);
    }
    if (ok) return r;
  }
  throw RangeError("R0 search failed up to " + std::to_string(R * std::exp2(50.0)));
}

// min (upper) or max (lower) of drift * r on [1e-6, R0), with the limit n-1 at r -> 0.
double drift_r_extreme(const ModelFunction& psi, double R0, bool want_min) {
  double best = psi.n() - 1.0;
  for (double r : geomspace(1e-6, R0, 401)) {
    if (r >= R0) break;
    const double v = psi.drift(r) * r;
    best = want_min ? std::min(best, v) : std::max(best, v);
  }
  return best;
}

struct LowerPlan {
  double R0, F, c_max, K;
};

LowerPlan plan_lower(int n, double m, double mu, double Q, double R, const ModelFunction& psi, double margin) {
  const double s2 = std::sqrt(2 * Q);
  LowerPlan pl{};
  const double mono = mu < 0 ? 2 * std::fabs(mu) / ((m - 1) * (n - 1) * s2) : 0.0;
  pl.R0 = search_R0(psi, mu, (n - 1) * s2, false, R, mono, margin);
  pl.F = drift_r_extreme(psi, pl.R0, false);
  const double Rp = std::pow(pl.R0, 1 + mu);
  if (mu < 1) {
    pl.c_max = std::min({1 / (2 * (n - 1) * s2), Rp / (4 * (pl.F + 1)), (m - 1) * Rp / (2 + (m - 1) * (pl.F + 1))}) /
               (m * (1 - mu));
    auto bracket = [&](double c) {
      return (4 * (m - 1) * Rp - 4 * m * (1 - mu) * ((m - 1) * (pl.F + 1) + 1 - mu) * c) /
             ((3 + mu) * (m - 1) * Rp - 4 * m * (m - 1) * (1 - mu) * (pl.F + 1) * c);
    };
    pl.K = 1.1 * std::max({bracket(0.0), bracket(pl.c_max), 1.0});
  } else {
    const double R2 = pl.R0 * pl.R0;
    pl.c_max = std::min({1 / (2 * m * (n - 1) * s2), R2 / (4 * m * (pl.F + 1)),
                         (m - 1) * R2 / (m * (2 + (m - 1) * (pl.F + 1)))});
    auto bracket = [&](double c) {
      return ((m - 1) * R2 - 4 * m * c) / (4 * (m - 1) * R2 - 4 * m * (m - 1) * (pl.F + 1) * c);
    };
    pl.K = 1.1 * std::max(bracket(0.0), bracket(pl.c_max));
  }
  return pl;
}

double lower_radius_from_plan(const LowerPlan& pl, double mu) {
  return mu < 1 ? std::pow(pl.K, 1 / (1 - mu)) * pl.R0 : std::exp(pl.K) * pl.R0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string to_string(Regime r) { return kRegimeNames[static_cast<int>(r)]; }

Regime regime_from_string(const std::string& s) {
  for (int i = 0; i < 10; ++i)
    if (s == kRegimeNames[i]) return static_cast<Regime>(i);
  throw SchemaError("unknown regime '" + s + "'");
}

bool is_upper(Regime r) {
  switch (r) {
    case Regime::qh_subcritical_upper:
    case Regime::qh_critical_upper:
    case Regime::qe_barenblatt_upper:
    case Regime::weighted_upper:
    case Regime::weighted_critical_upper:
      return true;
    default:
      return false;
  }
}

double BarrierSpec::t0() const { return std::exp(log_t0); }

double evaluate(const BarrierSpec& spec, double r, double t) {
  const Shape sh = shape(spec, std::fabs(r), std::max(t, 0.0));
  if (!(sh.phi > 0)) return 0.0;
  return sh.pref * std::pow(sh.phi, spec.p());
}

double evaluate_dt(const BarrierSpec& spec, double r, double t) {
  const Shape sh = shape(spec, std::fabs(r), std::max(t, 0.0));
  if (!(sh.phi > 0)) return 0.0;
  const double p = spec.p();
  return sh.dpref * std::pow(sh.phi, p) + p * sh.pref * std::pow(sh.phi, p - 1) * sh.dphi;
}

double support_radius(const BarrierSpec& s, double t) {
  const double L = log_tau(s, std::max(t, 0.0));
  if (is_subcritical(s.regime)) {
    const double top = s.gamma * std::pow(L, (1 - s.mu) / (1 + s.mu));
    if (top >= std::pow(s.R0, 1 - s.mu)) return std::pow(top, 1 / (1 - s.mu));
    const double inner = top - 0.5 * (1 + s.mu) * std::pow(s.R0, 1 - s.mu);
    return inner > 0 ? std::sqrt(2 * std::pow(s.R0, 1 + s.mu) * inner / (1 - s.mu)) : 0.0;
  }
  if (is_critical(s.regime)) {
    const double top = s.eta + 0.5 * std::log(L);
    if (top >= std::log(s.R0)) return std::exp(top);
    const double inner = top - std::log(s.R0) + 0.5;
    return inner > 0 ? s.R0 * std::sqrt(2 * inner) : 0.0;
  }
  if (is_barenblatt(s.regime)) {
    const double b = 1.0 / (2 + s.n_q * (s.m - 1));
    return s.gamma > 0 ? std::sqrt(s.gamma) * std::exp(b * L) : 0.0;
  }
  if (is_weighted(s.regime)) return std::exp(std::pow(s.gamma, 1 / (1 - s.nu)) * L);
  return std::exp(std::exp(s.eta) * L);
}

std::vector<double> kink_radii(const BarrierSpec& spec, double t) {
  std::vector<double> k{support_radius(spec, t)};
  if (is_subcritical(spec.regime) || is_critical(spec.regime)) k.push_back(spec.R0);
  if (is_weighted(spec.regime) || is_weighted_critical(spec.regime)) k.push_back(spec.s_min);
  return k;
}

// ---------------------------------------------------------------- quasi-hyperbolic constructors

BarrierSpec upper_qh_subcritical(int n, double m, double mu, double Q, double R, const ModelFunction& psi,
                                 const DatumStats& datum, const UpperTuning& tuning) {
  check_common(n, m, datum, true);
  require(mu > -1 && mu < 1, "mu in (-1,1)", "mu = " + fmt(mu));
  require(Q > 0 && R > 0, "Q>0,R>0", "Q = " + fmt(Q) + ", R = " + fmt(R));
  BarrierSpec s;
  s.regime = Regime::qh_subcritical_upper;
  s.n = n, s.m = m, s.mu = mu, s.Q = Q, s.R = R, s.datum = datum;
  const double p = s.p();
  const double sq = std::sqrt(Q / 2);
  const double mono = mu > 0 ? 4 * mu / ((m - 1) * (n - 1) * sq) : 0.0;
  s.R0 = search_R0(psi, mu, (n - 1) * sq, true, R, mono, tuning.margin);
  s.saturations.push_back({"R0", "drift/r^mu - mu/r^(1+mu) >= (n-1)sqrt(Q/2) on [R0, 4R0], 5% margin", s.R0});
  s.E = drift_r_extreme(psi, s.R0, true);
  const double Rp = std::pow(s.R0, 1 + mu);

  const double k_floor = std::max(1.0, (n - 1) * sq * Rp / (s.E + 1));
  s.k = tuning.k.value_or(k_floor);
  require(s.k >= k_floor * (1 - 1e-12), "k floor", "k = " + fmt(s.k) + " < " + fmt(k_floor));
  s.log_t0 = Rp + std::log1p(tuning.margin);
  s.saturations.push_back({"t0", "t0 > exp(R0^(1+mu)), margin", s.t0()});

  const double C_pde = std::pow(2 * s.k / (m * (1 - mu) * (n - 1) * sq), p);
  const double C_dat = std::exp(p * s.log_t0) * datum.sup;
  s.C = std::max(C_pde, C_dat);
  s.saturations.push_back({"C", C_pde >= C_dat ? "PDE floor with k" : "datum floor t0^p M", s.C});

  const double c = std::pow(s.C, m - 1);
  const double g1 = std::pow(m * (1 + mu) * (1 - mu) * c / (m - 1), (1 - mu) / (1 + mu));
  const double den = m * (1 - mu) * (1 + s.E) * c - Rp;
  const double g2 = 1 + m * (1 - mu) * (1 - mu) * c / ((m - 1) * den);
  const double R_eff = std::max(datum.support, s.R0);
  const double g3 = (1 + std::pow(R_eff, 1 - mu)) / std::pow(s.log_t0, (1 - mu) / (1 + mu));
  s.gamma = std::max({g1, g2, g3});
  s.aux["gamma_pde_floor"] = std::max(g1, g2);
  s.aux["R_eff"] = R_eff;
  s.saturations.push_back(
      {"gamma", s.gamma == g1 ? "outer PDE floor" : (s.gamma == g2 ? "inner PDE floor" : "datum floor"), s.gamma});
  return s;
}

double lower_required_radius(int n, double m, double mu, double Q, double R, const ModelFunction& psi) {
  return lower_radius_from_plan(plan_lower(n, m, mu, Q, R, psi, 0.05), mu);
}

BarrierSpec lower_qh_subcritical(int n, double m, double mu, double Q, double R, double D,
                                 const ModelFunction& psi, const DatumStats& datum, const LowerTuning& tuning) {
  check_common(n, m, datum, false);
  require(mu > -1 && mu < 1, "mu in (-1,1)", "mu = " + fmt(mu));
  require(Q > 0 && R > 0 && D >= 0, "Q>0,R>0,D>=0", "Q = " + fmt(Q) + ", D = " + fmt(D));
  BarrierSpec s;
  s.regime = Regime::qh_subcritical_lower;
  s.n = n, s.m = m, s.mu = mu, s.Q = Q, s.R = R, s.D = D, s.datum = datum;
  const double p = s.p();
  const LowerPlan pl = plan_lower(n, m, mu, Q, R, psi, tuning.margin);
  s.R0 = pl.R0, s.F = pl.F, s.K_wait = pl.K;
  const double R_req = lower_radius_from_plan(pl, mu);
  s.aux["R_required"] = R_req;
  if (!(datum.inf > 0) || datum.inf_radius < R_req)
    throw WaitingRequired(R_req, "lower barrier needs inf u0 > 0 on B_" + fmt(R_req));

  const double scale = 2 * m * (1 - mu) * (n - 1) * std::sqrt(2 * Q);
  const double h_max = pl.c_max * scale;
  s.h = tuning.h.value_or(h_max);
  require(s.h > 0 && s.h <= h_max * (1 + 1e-12), "h ceiling", "h = " + fmt(s.h) + " > " + fmt(h_max));
  const double c_h = s.h / scale;
  const double c_dat = std::pow(datum.inf, m - 1) /
                       ((pl.K - 0.5 * (1 + mu)) * std::pow(s.R0, 1 - mu));
  const double c = std::min(c_h, c_dat);
  s.C = std::pow(c, p);
  s.aux["C_pde_ceiling"] = std::pow(pl.c_max, p);
  s.saturations.push_back({"C", c_h <= c_dat ? "PDE ceiling with h" : "datum ceiling L/((K-(1+mu)/2) R0^(1-mu))^p",
                           s.C});
  s.gamma = std::pow(m * (1 + mu) * (1 - mu) * c / (m - 1), (1 - mu) / (1 + mu));
  s.saturations.push_back({"gamma", "PDE ceiling, equality", s.gamma});
  s.log_t0 = std::pow(s.R0, 1 + mu) * std::pow(pl.K / s.gamma, (1 + mu) / (1 - mu));
  s.saturations.push_back({"t0", "log t0 = R0^(1+mu) (K/gamma)^((1+mu)/(1-mu))", s.log_t0});
  return s;
}

BarrierSpec upper_qh_critical(int n, double m, double Q, double R, const ModelFunction& psi,
                              const DatumStats& datum, const UpperTuning& tuning) {
  check_common(n, m, datum, true);
  require(Q > 0 && R > 0, "Q>0,R>0", "Q = " + fmt(Q));
  BarrierSpec s;
  s.regime = Regime::qh_critical_upper;
  s.n = n, s.m = m, s.mu = 1, s.Q = Q, s.R = R, s.datum = datum;
  const double p = s.p();
  const double sq = std::sqrt(Q / 2);
  s.R0 = search_R0(psi, 1.0, (n - 1) * sq, true, R, 0.0, tuning.margin);
  s.E = drift_r_extreme(psi, s.R0, true);
  const double R2 = s.R0 * s.R0;
  s.log_t0 = R2 + std::log1p(tuning.margin);
  const double k1 = std::pow(2 / (m * (n - 1) * sq), p);
  const double k2 = std::pow(2 * R2 / (m * (s.E + 1)), p);
  const double kd = std::exp(p * s.log_t0) * datum.sup;
  s.kappa = std::max({k1, k2, kd});
  s.saturations.push_back({"kappa", s.kappa == kd ? "datum floor t0^p M" : "PDE floor", s.kappa});
  const double c = std::pow(s.kappa, m - 1);
  const double e1 = 0.5 * std::log(2 * m * c / (m - 1));
  const double e2 = m * c / ((m - 1) * (m * (s.E + 1) * c - R2));
  const double R_eff = std::max(datum.support, s.R0);
  const double e3 = 1 + std::log(R_eff) - 0.5 * std::log(s.log_t0);
  s.eta = std::max({e1, e2, e3});
  s.aux["eta_pde_floor"] = std::max(e1, e2);
  s.aux["R_eff"] = R_eff;
  s.saturations.push_back({"eta", s.eta == e3 ? "datum floor" : "PDE floor", s.eta});
  return s;
}

BarrierSpec lower_qh_critical(int n, double m, double Q, double R, double D, const ModelFunction& psi,
                              const DatumStats& datum, const LowerTuning& tuning) {
  check_common(n, m, datum, false);
  require(Q > 0 && R > 0 && D >= 0, "Q>0,R>0,D>=0", "Q = " + fmt(Q));
  BarrierSpec s;
  s.regime = Regime::qh_critical_lower;
  s.n = n, s.m = m, s.mu = 1, s.Q = Q, s.R = R, s.D = D, s.datum = datum;
  const double p = s.p();
  const LowerPlan pl = plan_lower(n, m, 1.0, Q, R, psi, tuning.margin);
  s.R0 = pl.R0, s.F = pl.F, s.K_wait = pl.K;
  const double R_req = lower_radius_from_plan(pl, 1.0);
  s.aux["R_required"] = R_req;
  if (!(datum.inf > 0) || datum.inf_radius < R_req)
    throw WaitingRequired(R_req, "lower barrier needs inf u0 > 0 on B_" + fmt(R_req));
  const double frac = tuning.h.value_or(1.0);
  require(frac > 0 && frac <= 1, "h ceiling", "h = " + fmt(frac));
  s.h = frac;
  const double c_h = frac * pl.c_max;
  const double c_dat = std::pow(datum.inf, m - 1) / (pl.K + 0.5);
  const double c = std::min(c_h, c_dat);
  s.kappa = std::pow(c, p);
  s.saturations.push_back({"kappa", c_h <= c_dat ? "PDE ceiling" : "datum ceiling L/(K+1/2)^p", s.kappa});
  s.eta = 0.5 * std::log(2 * m * c / (m - 1));
  s.saturations.push_back({"eta", "PDE ceiling, equality", s.eta});
  s.log_t0 = s.R0 * s.R0 * std::exp(2 * (pl.K - s.eta));
  s.saturations.push_back({"t0", "log t0 = R0^2 exp(2(K - eta))", s.log_t0});
  return s;
}

// ---------------------------------------------------------------- quasi-Euclidean

BarenblattExponents barenblatt_exponents(int n, double mu, double Q) {
  require(mu <= -1, "mu<=-1", "mu = " + fmt(mu));
  if (mu < -1) return {1.0, static_cast<double>(n), 0.0};
  require(Q >= 0, "Q>=0", "Q = " + fmt(Q));
  require(n >= 3, "n>=3", "the two-dimensional case needs a lift dimension");
  const double q = 0.5 * (1 + std::sqrt(1 + 4 * Q));
  return {q, 1 + q * (n - 1), p_q(n, q)};
}

BarrierSpec barenblatt_qe(int n, double m, double mu, double Q, const DatumStats& datum, bool upper) {
  check_common(n, m, datum, upper);
  const auto ex = barenblatt_exponents(n, mu, Q);
  BarrierSpec s;
  s.regime = upper ? Regime::qe_barenblatt_upper : Regime::qe_barenblatt_lower;
  s.n = n, s.m = m, s.mu = mu, s.Q = Q, s.datum = datum;
  s.n_q = ex.n_q, s.p_q = ex.p_q;
  const double b = 1.0 / (2 + s.n_q * (m - 1));
  s.C = std::pow(b * (m - 1) / (2 * m), s.p());
  s.log_t0 = 0.0;
  if (upper) {
    s.gamma = datum.support * datum.support + std::pow(datum.sup / s.C, m - 1);
    s.saturations.push_back({"gamma0", "gamma0 - R^2 >= (M/C0)^(m-1)", s.gamma});
  } else {
    if (!(datum.inf > 0) || !(datum.inf_radius > 0))
      throw WaitingRequired(datum.support, "Barenblatt lower barrier needs inf u0 > 0 on some ball");
    s.gamma = std::min(datum.inf_radius * datum.inf_radius, std::pow(datum.inf / s.C, m - 1));
    s.saturations.push_back({"gamma0", "support in the ball and C0 gamma0^p <= L", s.gamma});
  }
  s.saturations.push_back({"C0", "self-similar constant (b(m-1)/(2m))^p in dimension n_q", s.C});
  return s;
}

// ---------------------------------------------------------------- weighted Euclidean

namespace {

// rho s^2 (log s)^nu bounds over [s_min, s_max] for a sampled profile.
std::pair<double, double> weight_ratio_bounds(const WeightProfile& rho, double nu, double s_min) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double s : geomspace(s_min, std::max(rho.s_max(), 2 * s_min), 400)) {
    const double v = std::exp(rho.log_rho(s) + 2 * std::log(s) + nu * std::log(std::log(s)));
    lo = std::min(lo, v), hi = std::max(hi, v);
  }
  return {lo, hi};
}

bool weighted_ok(const BarrierSpec& s, const ResidualOperator& op) {
  const auto ts = residual_times(1e6, 25);
  const auto rep = residual(s, op, residual_grid(s, ts, 1500), ts);
  return rep.verdict == Verdict::pass;
}

}  // namespace

WeightedPair weighted_euclidean(double nu, double c_weight, int n, double m, const DatumStats& datum,
                                const WeightProfile* rho) {
  require(nu <= 1, "nu<=1", "nu = " + fmt(nu));
  require(n >= 3, "n>=3", "weighted barriers are built for n >= 3");
  require(c_weight > 0, "c_weight>0", fmt(c_weight));
  check_common(n, m, datum, true);
  const double p = 1 / (m - 1);
  const double nu_plus = std::max(nu, 0.0), nu_minus = std::max(-nu, 0.0);
  const double s_min = std::max(2.0, std::exp(2 * nu_plus / (n - 2)));
  const double sm = std::log(s_min);
  double c1 = c_weight, c2 = c_weight;
  if (rho) std::tie(c1, c2) = weight_ratio_bounds(*rho, nu, s_min);

  ResidualOperator op;
  if (rho) {
    op = weighted_operator(*rho, s_min);
  } else {
    op.drift = [n](double s) { return (n - 1) / s; };
    op.weight = [c_weight, nu](double s) { return c_weight / (s * s * std::pow(std::log(s), nu)); };
    op.r_min = s_min;
  }

  BarrierSpec base;
  base.n = n, base.m = m, base.nu = nu, base.c_weight = c_weight, base.s_min = s_min, base.datum = datum;
  base.aux["c_lo"] = c1, base.aux["c_hi"] = c2;
  const bool critical = nu == 1.0;
  const double sR = std::log(std::max(datum.support, s_min));

  // Upper: amplitude from the diffusion floor, gamma (or eta) from the free-boundary condition,
  // t0 from the datum. Enlarged until the sweep passes.
  BarrierSpec up = base;
  up.regime = critical ? Regime::weighted_critical_upper : Regime::weighted_upper;
  {
    double a = critical ? c2 / (n - 2 - 1 / sm) : 2 * c2 / (n - 2 - nu_plus / sm);
    double L0 = std::max({std::exp(1.0), 2 * sm, 2 * sR});
    double grow = 1.0;
    bool ok = false;
    for (int it = 0; it < 16 && !ok; ++it) {
      for (int fix = 0; fix < 4; ++fix) {
        up.C = std::pow(critical ? a / m : a / (m * (1 - nu)), p);
        if (critical) {
          up.eta = std::log(1.1 * grow * a * p / c1);
          L0 = std::max(L0, 2 * sR * std::exp(-up.eta));
          const double a_dat = datum.sup * std::exp(p * L0) / std::pow(std::log(2.0), p);
          if (up.C >= a_dat) break;
          up.C = a_dat;
          a = m * std::pow(up.C, m - 1);
        } else {
          up.gamma = grow * 1.1 * std::pow(a * p / c1, 1 - nu);
          L0 = std::max(L0, std::pow(2.0, 1 / (1 - nu)) * sR / std::pow(up.gamma, 1 / (1 - nu)));
          const double a_dat = datum.sup * std::exp(p * L0) * std::pow(2 / (up.gamma * std::pow(L0, 1 - nu)), p);
          if (up.C >= a_dat) break;
          up.C = a_dat;
          a = m * std::pow(up.C, m - 1) * (1 - nu);
        }
      }
      up.log_t0 = L0;
      ok = weighted_ok(up, op);
      if (!ok) grow *= 1.5, L0 *= 1.5;
    }
    if (!ok) throw NumericalError("weighted upper barrier: residual sweep did not pass after enlargement");
    up.saturations.push_back({"A", "diffusion floor and datum floor", up.C});
    up.saturations.push_back({critical ? "eta" : "gamma", "free-boundary floor, validated by sweep",
                              critical ? up.eta : up.gamma});
    up.saturations.push_back({"t0", "datum and interior, validated by sweep", up.log_t0});
  }

  // Lower: amplitude below the diffusion ceiling, gamma (or eta) below the free-boundary ceiling.
  BarrierSpec lo = base;
  lo.regime = critical ? Regime::weighted_critical_lower : Regime::weighted_lower;
  {
    if (!(datum.inf > 0) || datum.inf_radius <= s_min)
      throw WaitingRequired(s_min, "weighted lower barrier needs inf u0 > 0 on a ball beyond s_min");
    const double sL = std::log(datum.inf_radius);
    double a = critical ? c1 / (2 * (n - 2)) : c1 / (2 * (n - 2 + nu_minus / sm));
    double shrink = 1.0;
    bool ok = false;
    for (int it = 0; it < 16 && !ok; ++it) {
      lo.C = std::pow(critical ? a / m : a / (m * (1 - nu)), p);
      double L0;
      if (critical) {
        lo.eta = std::log(0.9 * shrink * a * p / c2);
        L0 = sL * std::exp(-lo.eta);  // support exactly at the datum ball
      } else {
        lo.gamma = 0.9 * shrink * std::pow(a * p / c2, 1 - nu);
        L0 = sL / std::pow(lo.gamma, 1 / (1 - nu));
      }
      lo.log_t0 = L0;
      if (support_radius(lo, 0.0) <= s_min * 1.01)
        throw WaitingRequired(s_min, "weighted lower barrier support would sit inside s_min");
      const double top = evaluate(lo, s_min, 0.0);
      if (top > datum.inf) {
        a *= std::pow(datum.inf / top, m - 1) * 0.9;
        continue;
      }
      ok = weighted_ok(lo, op);
      if (!ok) shrink *= 0.7;
    }
    if (!ok) throw NumericalError("weighted lower barrier: residual sweep did not pass after shrinking");
    lo.saturations.push_back({"A", "diffusion ceiling and datum ceiling", lo.C});
    lo.saturations.push_back({critical ? "eta" : "gamma", "free-boundary ceiling, validated by sweep",
                              critical ? lo.eta : lo.gamma});
    lo.saturations.push_back({"t0", "support at t=0 equals the datum ball", lo.log_t0});
  }
  return {up, lo};
}

// ---------------------------------------------------------------- counterexamples

BarrierSpec break_upper_gamma(const BarrierSpec& spec) {
  BarrierSpec s = spec;
  if (is_subcritical(spec.regime)) {
    s.gamma = 0.5 * spec.aux.at("gamma_pde_floor");
  } else if (is_critical(spec.regime)) {
    s.eta = spec.aux.at("eta_pde_floor") - std::log(2.0);
  } else {
    s.gamma *= 0.5;
    s.eta -= std::log(2.0);
  }
  s.saturations.push_back({"gamma", "broken: half of the PDE floor", s.gamma});
  return s;
}

BarrierSpec break_lower_C(const BarrierSpec& spec) {
  BarrierSpec s = spec;
  s.C *= 10;
  s.kappa *= 10;
  s.saturations.push_back({"C", "broken: ten times the ceiling", s.C});
  return s;
}

// ---------------------------------------------------------------- dump

std::string BarrierSpec::dump() const {
  std::ostringstream os;
  os << "regime = " << to_string(regime) << "\n";
  auto kv = [&](const char* k, double v) { os << k << " = " << fmt(v) << "\n"; };
  os << "n = " << n << "\n";
  kv("m", m), kv("mu", mu), kv("Q", Q), kv("R", R), kv("R0", R0);
  kv("C", C), kv("gamma", gamma), kv("kappa", kappa), kv("eta", eta), kv("log_t0", log_t0);
  kv("n_q", n_q), kv("p_q", p_q), kv("nu", nu), kv("c_weight", c_weight), kv("s_min", s_min);
  kv("k", k), kv("h", h), kv("E", E), kv("F", F), kv("D", D), kv("K_wait", K_wait);
  kv("time_origin", time_origin);
  kv("datum.support", datum.support), kv("datum.sup", datum.sup), kv("datum.inf", datum.inf);
  kv("datum.inf_radius", datum.inf_radius);
  for (const auto& [k2, v] : aux) os << "aux." << k2 << " = " << fmt(v) << "\n";
  for (const auto& sat : saturations) os << "# " << sat.constant << " = " << fmt(sat.value) << " : " << sat.rule << "\n";
  return os.str();
}

BarrierSpec parse_spec_dump(const std::string& text) {
  BarrierSpec s;
  std::istringstream is(text);
  std::string line;
  bool have_regime = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw SchemaError("spec dump: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq), val = line.substr(eq + 3);
    if (key == "regime") {
      s.regime = regime_from_string(val);
      have_regime = true;
      continue;
    }
    double v;
    try {
      v = std::stod(val);
    } catch (const std::exception&) {
      throw SchemaError("spec dump: bad number for '" + key + "'");
    }
    if (key.rfind("aux.", 0) == 0) {
      s.aux[key.substr(4)] = v;
      continue;
    }
    std::map<std::string, double*> fields = {
        {"m", &s.m},         {"mu", &s.mu},         {"Q", &s.Q},           {"R", &s.R},
        {"R0", &s.R0},       {"C", &s.C},           {"gamma", &s.gamma},   {"kappa", &s.kappa},
        {"eta", &s.eta},     {"log_t0", &s.log_t0}, {"n_q", &s.n_q},       {"p_q", &s.p_q},
        {"nu", &s.nu},       {"c_weight", &s.c_weight}, {"s_min", &s.s_min}, {"k", &s.k},
        {"h", &s.h},         {"E", &s.E},           {"F", &s.F},           {"D", &s.D},
        {"K_wait", &s.K_wait}, {"time_origin", &s.time_origin}, {"datum.support", &s.datum.support},
        {"datum.sup", &s.datum.sup}, {"datum.inf", &s.datum.inf}, {"datum.inf_radius", &s.datum.inf_radius}};
    if (key == "n") {
      s.n = static_cast<int>(v);
    } else if (auto it = fields.find(key); it != fields.end()) {
      *it->second = v;
    } else {
      throw SchemaError("spec dump: unknown key '" + key + "'");
    }
  }
  if (!have_regime) throw SchemaError("spec dump: missing regime");
  return s;
}

}  // namespace pmelab
