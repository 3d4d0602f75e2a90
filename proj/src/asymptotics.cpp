#include "pmelab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmelab/barriers.hpp"
#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

std::string to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::qh_subcritical: return "qh_subcritical";
    case RegimeKind::qh_critical: return "qh_critical";
    case RegimeKind::qe_critical: return "qe_critical";
    case RegimeKind::qe_subcritical: return "qe_subcritical";
    case RegimeKind::weighted: return "weighted";
  }
  return "?";
}

RegimeKind regime_kind_from_string(const std::string& s) {
  for (auto k : {RegimeKind::qh_subcritical, RegimeKind::qh_critical, RegimeKind::qe_critical,
                 RegimeKind::qe_subcritical, RegimeKind::weighted})
    if (to_string(k) == s) return k;
  throw SchemaError("unknown regime '" + s + "'");
}

std::string to_string(SupportLaw s) {
  switch (s) {
    case SupportLaw::log_power: return "log_power";
    case SupportLaw::sqrt_log: return "sqrt_log";
    case SupportLaw::power: return "power";
    case SupportLaw::exp_log: return "exp_log";
  }
  return "?";
}

std::string RegimePrediction::to_text() const {
  std::ostringstream os;
  os << "regime = " << to_string(kind) << "\nalpha = " << format_double(alpha) << "\nbeta = " << format_double(beta)
     << "\nloglog = " << (loglog ? 1 : 0) << "\nsup_exponent = " << format_double(sup_exponent)
     << "\nsupport_law = " << to_string(support_law) << "\nsupport_exponent = " << format_double(support_exponent)
     << "\nvolume_exponent = " << format_double(volume_exponent) << "\nvolume_law = " << volume_law << "\n";
  return os.str();
}

RegimePrediction predict(RegimeKind kind, int n, double m, double param) {
  if (n < 2) throw ConstraintError("n>=2", "n = " + std::to_string(n));
  if (!(m > 1)) throw ConstraintError("m>1", "m = " + std::to_string(m));
  RegimePrediction p;
  p.kind = kind;
  const double k = m - 1;
  switch (kind) {
    case RegimeKind::qh_subcritical: {
      const double mu = param;
      if (!(mu > -1 && mu < 1)) throw ConstraintError("mu in (-1,1)", "mu = " + std::to_string(mu));
      p.alpha = 1;
      p.beta = (1 - mu) / (1 + mu);
      p.support_law = SupportLaw::log_power;
      p.support_exponent = 1 / (1 + mu);
      p.volume_exponent = 1 / k;
      p.volume_law = "V ~ t^{1/(m-1)}";
      break;
    }
    case RegimeKind::qh_critical:
      p.alpha = 1;
      p.beta = 0;
      p.loglog = true;
      p.support_law = SupportLaw::sqrt_log;
      p.support_exponent = 0.5;
      p.volume_exponent = 1 / k;
      p.volume_law = "V ~ t^{1/(m-1)}";
      break;
    case RegimeKind::qe_critical:
    case RegimeKind::qe_subcritical: {
      double nq = n;
      if (kind == RegimeKind::qe_critical) {
        if (!(param >= 0)) throw ConstraintError("Q>=0", "Q = " + std::to_string(param));
        nq = barenblatt_exponents(n, -1.0, param).n_q;
      }
      p.alpha = nq * k / (2 + nq * k);
      p.beta = 0;
      p.support_law = SupportLaw::power;
      p.support_exponent = 1 / (2 + nq * k);
      p.volume_exponent = nq / (2 + nq * k);
      p.volume_law = "V ~ t^{n_q/(n_q(m-1)+2)}";
      break;
    }
    case RegimeKind::weighted: {
      const double nu = param;
      if (nu > 1) throw NotApplicableError("weighted regime: nu > 1 unsupported");
      p.alpha = 1;
      p.beta = nu < 1 ? 1 - nu : 0;
      p.loglog = nu == 1;
      p.support_law = SupportLaw::exp_log;
      p.support_exponent = 1;
      p.volume_exponent = 1 / k;
      p.volume_law = "log s of the free boundary grows like log t";
      break;
    }
  }
  p.sup_exponent = p.alpha / k;
  return p;
}

RegimePrediction predict_qh(int n, double m, double mu) {
  if (mu > 1) throw NotApplicableError("quasi-hyperbolic mu > 1: no prediction");
  if (mu <= -1) throw ConstraintError("mu>-1", "quasi-hyperbolic family needs mu > -1");
  return mu == 1 ? predict(RegimeKind::qh_critical, n, m, 1.0) : predict(RegimeKind::qh_subcritical, n, m, mu);
}

namespace {

struct Window {
  std::vector<double> t, y;
};

Window tail_window(const std::vector<double>& times, const std::vector<double>& ys, double window) {
  if (times.size() != ys.size()) throw ConstraintError("fit", "times and values differ in length");
  if (!(window > 0 && window <= 1)) throw ConstraintError("window in (0,1]", std::to_string(window));
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] > 1 && ys[i] > 0 && std::isfinite(ys[i])) t.push_back(times[i]), y.push_back(ys[i]);
  if (t.size() < 10) throw NumericalError("fit: need at least 10 usable samples with t > 1");
  const double lo = std::log(t.front()), hi = std::log(t.back());
  if (hi - lo < 2 * std::log(10.0)) throw NumericalError("fit: samples span less than two decades of t");
  const double cut = hi - window * (hi - lo);
  Window w;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::log(t[i]) >= cut * (1 - 1e-14)) w.t.push_back(t[i]), w.y.push_back(y[i]);
  if (w.t.size() < 4) throw ConstraintError("fit", "fewer than 4 samples in the fit window");
  return w;
}

LstsqResult checked_fit(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
  auto r = least_squares(cols, y);
  if (!(r.cond < 1e12)) throw NumericalError("fit: ill-conditioned window (condition number " +
                                             format_double(r.cond) + ")");
  return r;
}

}  // namespace

std::string ExponentFit::to_text() const {
  std::ostringstream os;
  os << "model = " << model << "\nalpha = " << format_double(alpha) << "\nalpha_se = " << format_double(alpha_se)
     << "\nbeta = " << format_double(beta) << "\nbeta_se = " << format_double(beta_se)
     << "\nloglog = " << (loglog ? 1 : 0) << "\nrss = " << format_double(rss)
     << "\nalpha_log = " << format_double(alpha_log) << "\nbeta_log = " << format_double(beta_log)
     << "\nalpha_power = " << format_double(alpha_power) << "\nwindow = [" << format_double(t_lo) << ", "
     << format_double(t_hi) << "]\nsamples = " << samples << "\n";
  return os.str();
}

ExponentFit fit_exponents(const std::vector<double>& times, const std::vector<double>& sup_norms, double m,
                          double window) {
  if (!(m > 1)) throw ConstraintError("m>1", "m = " + std::to_string(m));
  const Window w = tail_window(times, sup_norms, window);
  const std::size_t n = w.t.size();
  std::vector<double> one(n, 1.0), mlt(n), llt(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    mlt[i] = -std::log(w.t[i]);
    llt[i] = std::log(std::log(w.t[i]));
    y[i] = (m - 1) * std::log(w.y[i]);
  }
  ExponentFit f;
  f.t_lo = w.t.front();
  f.t_hi = w.t.back();
  f.samples = static_cast<int>(n);

  const auto p0 = checked_fit({one, mlt}, y);
  const auto p1 = checked_fit({one, mlt, llt}, y);
  f.alpha_power = p0.beta[1];
  f.alpha_power_se = p0.stderr_[1];
  f.alpha_log = p1.beta[1];
  f.alpha_log_se = p1.stderr_[1];
  f.beta_log = p1.beta[2];
  f.beta_log_se = p1.stderr_[2];

  // The log log log t regressor needs t > e in the whole window.
  bool have_ll = f.t_lo > std::exp(1.0) * (1 + 1e-12);
  LstsqResult p2;
  if (have_ll) {
    std::vector<double> lllt(n);
    for (std::size_t i = 0; i < n; ++i) lllt[i] = std::log(llt[i]);
    try {
      p2 = checked_fit({one, mlt, lllt}, y);
      f.alpha_ll = p2.beta[1];
      f.beta_ll = p2.beta[2];
      f.beta_ll_se = p2.stderr_[2];
    } catch (const NumericalError&) {
      have_ll = false;
    }
  }

  // BIC-style score; the floor keeps exact fits from being ranked by round-off.
  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, std::fabs(v));
  const double floor = n * std::pow(1e-13 * std::max(1.0, ymax), 2);
  auto score = [&](const LstsqResult& r, int k) {
    return n * std::log(std::max(r.rss, floor) / n) + k * std::log(static_cast<double>(n));
  };
  const double s0 = score(p0, 2), s1 = score(p1, 3);
  const double s2 = have_ll ? score(p2, 3) : std::numeric_limits<double>::infinity();
  if (s0 <= s1 && s0 <= s2) {
    f.model = "power";
    f.alpha = p0.beta[1];
    f.alpha_se = p0.stderr_[1];
    f.rss = p0.rss;
  } else if (s1 <= s2) {
    f.model = "power_log";
    f.alpha = p1.beta[1];
    f.alpha_se = p1.stderr_[1];
    f.beta = p1.beta[2];
    f.beta_se = p1.stderr_[2];
    f.rss = p1.rss;
  } else {
    f.model = "power_loglog";
    f.alpha = p2.beta[1];
    f.alpha_se = p2.stderr_[1];
    f.beta = p2.beta[2];
    f.beta_se = p2.stderr_[2];
    f.loglog = true;
    f.rss = p2.rss;
  }
  return f;
}

SupportFit fit_support(const std::vector<double>& times, const std::vector<double>& radii, SupportLaw law,
                       double window) {
  const Window w = tail_window(times, radii, window);
  const std::size_t n = w.t.size();
  std::vector<double> one(n, 1.0), x(n), y(n);
  const bool loglog = law == SupportLaw::log_power || law == SupportLaw::sqrt_log;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = loglog ? std::log(std::log(w.t[i])) : std::log(w.t[i]);
    y[i] = std::log(w.y[i]);
  }
  const auto r = checked_fit({one, x}, y);
  SupportFit s;
  s.law = law;
  s.coefficient = std::exp(r.beta[0]);
  s.exponent = r.beta[1];
  s.exponent_se = r.stderr_[1];
  s.rss = r.rss;
  s.t_lo = w.t.front();
  s.t_hi = w.t.back();
  return s;
}

std::string VolumeReport::to_text() const {
  std::ostringstream os;
  os << "volume_exponent_fit = " << format_double(exponent_fit) << "\nvolume_exponent_se = "
     << format_double(exponent_se) << "\nvolume_exponent_pred = " << format_double(exponent_pred)
     << "\nrel_dev = " << format_double(rel_dev) << "\n";
  return os.str();
}

VolumeReport volume_check(const Trajectory& traj, const RegimePrediction& pred, double window) {
  std::vector<double> t, v;
  for (const auto& s : traj.samples) t.push_back(s.t), v.push_back(s.diag.volume);
  const Window w = tail_window(t, v, window);
  const std::size_t n = w.t.size();
  std::vector<double> one(n, 1.0), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(w.t[i]), y[i] = std::log(w.y[i]);
  const auto r = checked_fit({one, x}, y);
  VolumeReport rep;
  rep.exponent_fit = r.beta[1];
  rep.exponent_se = r.stderr_[1];
  rep.exponent_pred = pred.volume_exponent;
  rep.rel_dev = std::fabs(rep.exponent_fit - rep.exponent_pred) / rep.exponent_pred;
  return rep;
}

MatchedFit matched_fit(const ExponentFit& fit, const RegimePrediction& pred) {
  if (pred.loglog) return {fit.alpha_ll, fit.beta_ll, fit.beta_ll_se, "power_loglog"};
  if (pred.beta != 0) return {fit.alpha_log, fit.beta_log, fit.beta_log_se, "power_log"};
  return {fit.alpha_power, 0.0, fit.alpha_power_se, "power"};
}

void append_fit_row(const std::string& path, const std::string& regime, const RegimePrediction& pred,
                    const ExponentFit& fit) {
  const auto mf = matched_fit(fit, pred);
  std::ostringstream win;
  win << format_double(fit.t_lo) << ":" << format_double(fit.t_hi);
  CsvWriter csv(path, {"regime", "alpha_pred", "alpha_fit", "beta_pred", "beta_fit", "stderr", "window"}, true);
  csv.row_cells({regime, pred.alpha, mf.alpha, pred.beta, mf.beta, mf.stderr_, win.str()});
}

}  // namespace pmelab
