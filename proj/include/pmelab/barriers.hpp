#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/chvar.hpp"
#include "pmelab/geometry.hpp"

namespace pmelab {

enum class Regime {
  qh_subcritical_upper,
  qh_subcritical_lower,
  qh_critical_upper,
  qh_critical_lower,
  qe_barenblatt_upper,
  qe_barenblatt_lower,
  weighted_upper,
  weighted_lower,
  weighted_critical_upper,
  weighted_critical_lower,
};

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);
bool is_upper(Regime r);

// Support radius, sup and an inf on a ball for the initial datum.
struct DatumStats {
  double support = 1.0;   // R: u0 vanishes outside B_R
  double sup = 1.0;       // M
  double inf = 0.0;       // L = inf of u0 on B_{inf_radius}
  double inf_radius = 0.0;
};

// One constant together with the inequality that fixed it.
struct Saturation {
  std::string constant;
  std::string rule;
  double value;
};

struct BarrierSpec {
  Regime regime = Regime::qh_subcritical_upper;
  int n = 3;
  double m = 2.0;
  double mu = 0.0;
  double Q = 1.0;
  double R = 1.0;
  double R0 = 1.0;

  // qh_subcritical and weighted (A stored in C): C, gamma. Critical: kappa, eta.
  double C = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  double log_t0 = 0.0;  // t0 is kept in log form since lower specs can need t0 = exp(hundreds)

  // Barenblatt: C0 = C, gamma0 = gamma, in dimension n_q.
  double n_q = 3.0;
  double p_q = 0.0;

  // Weighted: rho ~ c_weight / (s^2 (log s)^nu), barrier valid for s >= s_min.
  double nu = 0.0;
  double c_weight = 1.0;
  double s_min = 0.0;

  double k = 1.0;  // upper tuning
  double h = 1.0;  // lower tuning
  DatumStats datum;
  double E = 0.0, F = 0.0, D = 0.0, K_wait = 0.0;
  // Physical time at which the barrier clock starts (lower specs built after a waiting time).
  double time_origin = 0.0;

  std::map<std::string, double> aux;
  std::vector<Saturation> saturations;

  double t0() const;
  double p() const { return 1.0 / (m - 1.0); }
  std::string dump() const;
};

BarrierSpec parse_spec_dump(const std::string& text);

// U(r, t) with t measured on the barrier clock.
double evaluate(const BarrierSpec& spec, double r, double t);
double evaluate_dt(const BarrierSpec& spec, double r, double t);
double support_radius(const BarrierSpec& spec, double t);
// Radii where U fails to be C^2 at time t (matching radius and free boundary).
std::vector<double> kink_radii(const BarrierSpec& spec, double t);

struct UpperTuning {
  std::optional<double> k;  // default: floor
  double margin = 0.05;
};
struct LowerTuning {
  std::optional<double> h;  // default: ceiling (h = 1 scaled)
  double margin = 0.05;
};

BarrierSpec upper_qh_subcritical(int n, double m, double mu, double Q, double R, const ModelFunction& psi,
                                 const DatumStats& datum, const UpperTuning& tuning = {});
// Throws WaitingRequired when the datum is not known to be positive on the required ball.
BarrierSpec lower_qh_subcritical(int n, double m, double mu, double Q, double R, double D,
                                 const ModelFunction& psi, const DatumStats& datum,
                                 const LowerTuning& tuning = {});
BarrierSpec upper_qh_critical(int n, double m, double Q, double R, const ModelFunction& psi,
                              const DatumStats& datum, const UpperTuning& tuning = {});
BarrierSpec lower_qh_critical(int n, double m, double Q, double R, double D, const ModelFunction& psi,
                              const DatumStats& datum, const LowerTuning& tuning = {});

// Radius of the ball on which a lower spec needs a positive datum. Same search as the constructors.
double lower_required_radius(int n, double m, double mu, double Q, double R, const ModelFunction& psi);

struct BarenblattExponents {
  double q;
  double n_q;
  double p_q;
};
// mu = -1 uses Q; mu < -1 gives n_q = n, p_q = 0.
BarenblattExponents barenblatt_exponents(int n, double mu, double Q);
BarrierSpec barenblatt_qe(int n, double m, double mu, double Q, const DatumStats& datum, bool upper);

struct WeightedPair {
  BarrierSpec upper;
  BarrierSpec lower;
};
WeightedPair weighted_euclidean(double nu, double c_weight, int n, double m, const DatumStats& datum,
                                const WeightProfile* rho = nullptr);

// Counterexamples: gamma at half its PDE floor, or C ten times its ceiling.
BarrierSpec break_upper_gamma(const BarrierSpec& spec);
BarrierSpec break_lower_C(const BarrierSpec& spec);

// Residual of rho U_t - (U^m)'' - drift (U^m)'.
struct ResidualOperator {
  std::function<double(double)> drift;
  std::function<double(double)> weight;  // empty means 1
  double r_min = 0.0;                     // points below are skipped
};
ResidualOperator manifold_operator(const ModelFunction& psi);
ResidualOperator weighted_operator(const WeightProfile& rho, double s_min);

enum class Verdict { pass, fail, unresolved };
std::string to_string(Verdict v);

struct ResidualPoint {
  double r, t, residual, scale;
};

struct ResidualReport {
  Verdict verdict = Verdict::pass;
  long sampled = 0;
  long violations = 0;
  long unresolved = 0;
  double worst = 0.0;  // most adverse residual / scale
  double worst_r = 0.0, worst_t = 0.0;
  std::vector<ResidualPoint> field;
  std::string to_text() const;
};

ResidualReport residual(const BarrierSpec& spec, const ResidualOperator& op, const std::vector<double>& grid,
                        const std::vector<double>& times, bool keep_field = false, double tol = 1e-6);

// Uniform grid out to 1.05 times the largest support over the given times.
std::vector<double> residual_grid(const BarrierSpec& spec, const std::vector<double>& times, int N = 2000);
// Geometric times in [0, T] (including 0).
std::vector<double> residual_times(double T, int count = 25);

void write_residual_csv(const ResidualReport& rep, const std::string& path);

}  // namespace pmelab
