#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/ode.hpp"

namespace pmelab {

enum class ModelKind { euclidean, hyperbolic_sinh, type_I, type_II, type_IV, ode_defined };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Large-r behaviour of psi, used for tail integrals and Table-1 classification.
enum class GrowthClass {
  exponential,  // log psi ~ sqrt(Q) r^{1+mu}/(1+mu), mu > -1
  power,        // psi ~ a r^q, q > 1
  linear,       // psi ~ c r
};

struct Asymptotics {
  GrowthClass growth = GrowthClass::linear;
  double mu = 0.0;  // -K ~ Q r^{2 mu}
  double Q = 0.0;
  double a = 1.0;   // power/linear coefficient
  double q = 1.0;   // power exponent
};

enum class CurvatureBranch { upper, lower };

// Coefficient w of psi'' = w psi.
struct CurvatureProfile {
  double Q = 1.0;
  double mu = 0.0;
  double R = 1.0;
  double D = 0.0;
  CurvatureBranch branch = CurvatureBranch::upper;

  double w(double r) const;
  std::vector<double> breakpoints() const;
  void validate() const;

  static CurvatureProfile upper(double Q, double mu, double R);
  static CurvatureProfile lower(double Q, double mu, double R, double D);
};

// Values at r > 0, all in log/ratio form so that exponentially large psi stays representable.
struct ModelSample {
  double log_psi;
  double g;  // psi'/psi
  double w;  // psi''/psi
};

class ModelImpl {
 public:
  virtual ~ModelImpl() = default;
  virtual ModelSample sample(double r) const = 0;
  virtual double log_psi(double r) const { return sample(r).log_psi; }
  // log of the integral of psi^{-p} over [R, infinity).
  virtual double log_tail_integral(double R, double p) const;
  virtual bool defined_beyond_range() const { return true; }
};

class ModelFunction {
 public:
  ModelFunction(std::shared_ptr<const ModelImpl> impl, ModelKind kind, int n, double r_max, double r_bar,
                std::map<std::string, double> params, Asymptotics asym);

  int n() const { return n_; }
  ModelKind kind() const { return kind_; }
  double r_max() const { return r_max_; }
  double r_bar() const { return r_bar_; }
  const std::map<std::string, double>& params() const { return params_; }
  const Asymptotics& asymptotics() const { return asym_; }
  const std::optional<CurvatureProfile>& profile() const { return profile_; }

  ModelFunction with_dimension(int n) const;
  ModelFunction with_range(double r_max) const;

  ModelSample sample(double r) const;
  double psi(double r) const;
  double dpsi(double r) const;
  double ddpsi(double r) const;
  double log_psi(double r) const;
  double drift(double r) const { return (n_ - 1) * sample(r).g; }
  double log_tail_integral(double R, double p) const;
  bool evaluable_beyond_range() const { return impl_->defined_beyond_range(); }

  const ModelImpl& impl() const { return *impl_; }
  void set_profile(const CurvatureProfile& p) { profile_ = p; }

 private:
  std::shared_ptr<const ModelImpl> impl_;
  ModelKind kind_;
  int n_;
  double r_max_;
  double r_bar_;
  std::map<std::string, double> params_;
  Asymptotics asym_;
  std::optional<CurvatureProfile> profile_;
};

// Closed forms. Parameter names: type_I {a1, alpha, A}, type_II {a1, alpha}, type_IV {A, c, alpha}.
ModelFunction make_closed_form(ModelKind kind, const std::map<std::string, double>& params, int n,
                               double r_max = 100.0);

ModelFunction solve_psi_from_curvature(const CurvatureProfile& profile, double r_max, int n = 3,
                                       const OdeOptions& opts = {});

struct Curvatures {
  double K_radial;
  double H_orthogonal;
  double Ric_radial;
  double drift;
};
Curvatures curvatures(const ModelFunction& psi, double r);

struct RiccatiReport {
  double G = 0.0;
  double deviation = 0.0;  // |G/sqrt(Q) - 1|
  double k_lower = 0.0;
  double k_upper = 0.0;
  bool within_sandwich = false;
  bool applicable = true;
  std::string note;
};
RiccatiReport riccati_diagnostic(const ModelFunction& psi, double Q, double mu, double r_probe);

// log of the integral of psi^e over [a, b], 0 < a < b.
double log_power_integral(const ModelImpl& m, double a, double b, double e);
inline double log_power_integral(const ModelFunction& psi, double a, double b, double e) {
  return log_power_integral(psi.impl(), a, b, e);
}

// omega_{n-1} times the integral of psi^{n-1} over [0, R].
double volume(const ModelFunction& psi, double R_ball);
// log of the integral of psi^{n-1} over [a, b] (no sphere factor).
double log_shell_integral(const ModelFunction& psi, double a, double b);

// Largest value of w = psi''/psi on (0, R], i.e. sup(-Ric)/(n-1) over the ball.
double sup_w_on_ball(const ModelFunction& psi, double R, int samples = 2000);

void write_psi_csv(const ModelFunction& psi, const std::string& path, int samples);

}  // namespace pmelab
