#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"

namespace pmelab {

enum class WeightClass { inv_square_log, power, log_power, constant, unknown };
std::string to_string(WeightClass c);

// Density rho(s) of the weighted Euclidean equation rho u_t = Delta_s u^m, sampled in log form.
class WeightProfile {
 public:
  using LogRho = std::function<double(double)>;   // s -> log rho(s)
  using SDLogRho = std::function<double(double)>;  // s -> s rho'(s)/rho(s)

  WeightProfile(double dimension, double s_max, LogRho log_rho, SDLogRho s_dlog, WeightClass cls,
                std::map<std::string, double> class_params = {});

  double dimension() const { return dim_; }
  double s_max() const { return s_max_; }
  WeightClass asymptotic_class() const { return cls_; }
  const std::map<std::string, double>& class_params() const { return params_; }
  bool vanishes_at_origin() const { return vanishes_at_origin_; }
  void set_vanishes_at_origin(bool v) { vanishes_at_origin_ = v; }

  double log_rho(double s) const { return log_rho_(s); }
  double rho(double s) const { return std::exp(log_rho_(s)); }
  double s_drho_over_rho(double s) const { return s_dlog_(s); }
  double drho(double s) const { return rho(s) * s_dlog_(s) / s; }

  static WeightProfile constant(double dimension, double value, double s_max);
  // rho = c / (s^2 (log s)^nu) at large s, smoothly continued to rho(0) = 1.
  static WeightProfile inverse_square_log(double dimension, double c, double nu, double s_max);
  // rho = (1 + (s/s1)^2)^{-p/2}-type power law with rho(0) = 1.
  static WeightProfile power_law(double dimension, double p, double s_max);

 private:
  double dim_;
  double s_max_;
  LogRho log_rho_;
  SDLogRho s_dlog_;
  WeightClass cls_;
  std::map<std::string, double> params_;
  bool vanishes_at_origin_ = false;
};

enum class ChvarMode { standard_n_ge_3, dim_lift_2d, log_map_2d, inverse };

// Radial map r <-> s between a model manifold and a weighted Euclidean space.
class ChangeOfVariables {
 public:
  struct Node {
    double r;
    double log_s;
    double slope = 0.0;   // d log s / d r
    double dslope = 0.0;  // d^2 log s / d r^2
  };

  ChvarMode mode() const { return mode_; }
  int manifold_dimension() const { return n_; }
  double target_dimension() const { return N_; }
  double lift_dimension() const { return N_; }
  double log_constant() const { return log_A_; }
  double r_max() const { return nodes_.back().r; }
  double s_max() const { return std::exp(nodes_.back().log_s); }
  const WeightProfile& weight() const { return *weight_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  double forward(double r) const;  // s(r)
  double log_forward(double r) const;
  double inverse(double s) const;  // r(s)
  double inverse_log(double log_s) const;
  // d log s / d r at r.
  double dlogs_dr(double r) const;

  // For inverse maps: psi(r) = s(r) rho(s(r))^{1/(2(n-1))}.
  const std::optional<ModelFunction>& reconstructed_psi() const { return psi_rt_; }

 private:
  friend ChangeOfVariables forward_map(const ModelFunction&, int);
  friend ChangeOfVariables dim_lift_2d(const ModelFunction&, double);
  friend ChangeOfVariables log_map_2d(const ModelFunction&);
  friend ChangeOfVariables inverse_map(const WeightProfile&, int);
  friend class InverseModelImpl;

  ChvarMode mode_ = ChvarMode::standard_n_ge_3;
  int n_ = 3;
  double N_ = 3;
  double p_ = 2;  // integrand power: ds / s^{N-1} = dr / psi^p
  double log_A_ = 0.0;
  std::vector<Node> nodes_;
  std::vector<double> log_I_;  // log of tail integrals at nodes (standard/lift)
  std::shared_ptr<const WeightProfile> weight_;
  std::optional<ModelFunction> psi_;     // forward: the source geometry
  std::optional<ModelFunction> psi_rt_;  // inverse: reconstructed geometry
  std::shared_ptr<const WeightProfile> source_weight_;

  std::size_t locate_r(double r) const;
  std::size_t locate_log_s(double ls) const;
  // log s on [r, b.r] of node interval j, by fixed-order quadrature from node j+1.
  double log_forward_in(std::size_t j, double r) const;
  double r_of_log_s_in(std::size_t j, double ls) const;
  double dlogs_dr_at(double r, double ls) const;
};

ChangeOfVariables forward_map(const ModelFunction& psi, int n);
ChangeOfVariables inverse_map(const WeightProfile& rho, int n);
ChangeOfVariables dim_lift_2d(const ModelFunction& psi, double n1);
ChangeOfVariables log_map_2d(const ModelFunction& psi);

// p_q = 2(n-1)(q-1)/((n-1)q-1).
double p_q(int n, double q);

struct Table1Report {
  std::string predicted_form;
  WeightClass predicted_class = WeightClass::unknown;
  double exponent_pred = 0.0;
  double exponent_fit = 0.0;
  double exponent_dev = 0.0;  // relative when the prediction is nonzero, absolute otherwise
  double constant_pred = 0.0;
  double constant_fit = 0.0;
  double constant_dev = 0.0;
  double s_lo = 0.0, s_hi = 0.0;
  bool super_euclidean = false;
  double s_dlog_at_hi = 0.0;  // s rho'/rho at s_hi, -> -2 for super-Euclidean inputs
  std::string to_text() const;
};

// Fits rho on a geometric grid of [s_lo, s_hi] (defaults: the last two decades below s_max).
Table1Report verify_table1(const ModelFunction& psi, const ChangeOfVariables& cov, double s_lo = 0.0,
                           double s_hi = 0.0);

void write_rho_csv(const ChangeOfVariables& cov, const std::string& path);

}  // namespace pmelab
