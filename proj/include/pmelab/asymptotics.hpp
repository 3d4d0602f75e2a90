#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pmelab/solver.hpp"

namespace pmelab {

enum class RegimeKind { qh_subcritical, qh_critical, qe_critical, qe_subcritical, weighted };
std::string to_string(RegimeKind k);
RegimeKind regime_kind_from_string(const std::string& s);

enum class SupportLaw { log_power, sqrt_log, power, exp_log };
std::string to_string(SupportLaw s);

// ||u||^{m-1} ~ t^{-alpha} (log t)^beta, or t^{-alpha} (log log t)^1 when loglog is set.
struct RegimePrediction {
  RegimeKind kind = RegimeKind::qh_subcritical;
  double alpha = 1.0;
  double beta = 0.0;
  bool loglog = false;
  double sup_exponent = 1.0;  // decay exponent of ||u|| itself
  SupportLaw support_law = SupportLaw::log_power;
  double support_exponent = 1.0;
  double volume_exponent = 1.0;
  std::string volume_law;
  std::string to_text() const;
};

// param is mu (qh regimes), Q (qe_critical), nu (weighted); ignored for qe_subcritical.
RegimePrediction predict(RegimeKind kind, int n, double m, double param);
// Quasi-hyperbolic family by mu: subcritical for mu in (-1,1), critical at mu = 1, refused above.
RegimePrediction predict_qh(int n, double m, double mu);

struct ExponentFit {
  std::string model;  // "power", "power_log", "power_loglog"
  double alpha = 0.0, alpha_se = 0.0;
  double beta = 0.0, beta_se = 0.0;
  bool loglog = false;
  double rss = 0.0;
  // Three-parameter fit with the log t regressor, whatever the selected model.
  double alpha_log = 0.0, beta_log = 0.0, alpha_log_se = 0.0, beta_log_se = 0.0;
  // Two-parameter pure power fit.
  double alpha_power = 0.0, alpha_power_se = 0.0;
  // Three-parameter fit with log log log t; NaN when the window starts below t = e.
  double alpha_ll = std::nan(""), beta_ll = std::nan(""), beta_ll_se = std::nan("");
  double t_lo = 0.0, t_hi = 0.0;
  int samples = 0;
  std::string to_text() const;
};

// Regression of log(y^{m-1}) over the last `window` fraction of samples (in log t).
ExponentFit fit_exponents(const std::vector<double>& times, const std::vector<double>& sup_norms, double m,
                          double window = 0.6);

struct SupportFit {
  SupportLaw law = SupportLaw::power;
  double coefficient = 0.0;
  double exponent = 0.0, exponent_se = 0.0;
  double rss = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
};
// log R against log log t (log_power, sqrt_log) or log t (power, exp_log).
SupportFit fit_support(const std::vector<double>& times, const std::vector<double>& radii, SupportLaw law,
                       double window = 0.6);

struct VolumeReport {
  double exponent_fit = 0.0, exponent_se = 0.0;
  double exponent_pred = 0.0;
  double rel_dev = 0.0;
  std::string to_text() const;
};
VolumeReport volume_check(const Trajectory& traj, const RegimePrediction& pred, double window = 0.6);

// The fit whose form matches the prediction: power, power_log or power_loglog.
struct MatchedFit {
  double alpha, beta, stderr_;
  std::string model;
};
MatchedFit matched_fit(const ExponentFit& fit, const RegimePrediction& pred);

// Appends (regime, alpha_pred, alpha_fit, beta_pred, beta_fit, stderr, window) to a CSV ledger.
void append_fit_row(const std::string& path, const std::string& regime, const RegimePrediction& pred,
                    const ExponentFit& fit);

}  // namespace pmelab
