#include "pmelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw ConstraintError("missing parameter", key);
  return it->second;
}

ModelSample flat_sample(double r) { return {std::log(r), 1.0 / r, 0.0}; }

}  // namespace

// Pieces are short enough that the integrand varies by a few e-folds at most,
// so Gauss-Kronrod never misses the mass.
double log_power_integral(const ModelImpl& m, double a, double b, double e) {
  double acc = -std::numeric_limits<double>::infinity();
  double x = a;
  while (x < b) {
    const ModelSample s = m.sample(x);
    double len = 0.25;
    const double rate = std::abs(e) * s.g;
    if (rate > 0) len = std::min(len, 4.0 / rate);
    len = std::max(len, 1e-12 * std::max(1.0, x));
    const double y = std::min(b, x + len);
    const double ref = e > 0 ? m.log_psi(y) : s.log_psi;
    auto f = [&](double t) { return std::exp(e * (m.log_psi(t) - ref)); };
    // A short interval with little log-variation needs no refinement; the adaptive
    // error test sits at the rounding floor there and recurses to max depth.
    const bool smooth = rate * (y - x) < 0.5;
    const QuadResult q = integrate(f, x, y, 1e-12, smooth ? 0 : 12);
    if (q.value > 0) acc = log_add_exp(acc, e * ref + std::log(q.value));
    x = y;
  }
  return acc;
}

namespace {

class EuclideanImpl final : public ModelImpl {
 public:
  ModelSample sample(double r) const override { return flat_sample(r); }
  double log_tail_integral(double R, double p) const override {
    if (p <= 1.0) throw NotApplicableError("tail integral of r^{-p} diverges for p <= 1");
    return (1.0 - p) * std::log(R) - std::log(p - 1.0);
  }
};

class SinhImpl final : public ModelImpl {
 public:
  ModelSample sample(double r) const override {
    const double lp = r > 20.0 ? r - std::log(2.0) + std::log1p(-std::exp(-2.0 * r)) : std::log(std::sinh(r));
    return {lp, 1.0 / std::tanh(r), 1.0};
  }
};

class TypeIImpl final : public ModelImpl {
 public:
  TypeIImpl(double a1, double alpha, double A, double rbar) : a1_(a1), alpha_(alpha), A_(A), rbar_(rbar) {}
  ModelSample sample(double r) const override {
    if (r <= rbar_) return flat_sample(r);
    const double E = a1_ * std::pow(r, alpha_);
    const double Eb = a1_ * std::pow(rbar_, alpha_);
    double lp;
    if (E < 600.0) {
      lp = std::log(A_ * std::exp(Eb) * std::expm1(E - Eb) + rbar_);
    } else {
      lp = std::log(A_) + E + std::log1p(-std::exp(Eb - E) + (rbar_ / A_) * std::exp(-E));
    }
    const double g = std::exp(std::log(A_ * a1_ * alpha_) + (alpha_ - 1.0) * std::log(r) + E - lp);
    const double w = g * ((alpha_ - 1.0) / r + a1_ * alpha_ * std::pow(r, alpha_ - 1.0));
    return {lp, g, w};
  }

 private:
  double a1_, alpha_, A_, rbar_;
};

class TypeIIImpl final : public ModelImpl {
 public:
  TypeIIImpl(double a1, double alpha, double rbar)
      : a1_(a1), alpha_(alpha), rbar_(rbar), B_(rbar * (alpha - 1.0) / alpha) {}
  ModelSample sample(double r) const override {
    if (r <= rbar_) return flat_sample(r);
    const double lr = std::log(r);
    const double lp = std::log(a1_) + alpha_ * lr + std::log1p(B_ / (a1_ * std::pow(r, alpha_)));
    const double g = std::exp(std::log(a1_ * alpha_) + (alpha_ - 1.0) * lr - lp);
    const double w = std::exp(std::log(a1_ * alpha_ * (alpha_ - 1.0)) + (alpha_ - 2.0) * lr - lp);
    return {lp, g, w};
  }

 private:
  double a1_, alpha_, rbar_, B_;
};

class TypeIVImpl final : public ModelImpl {
 public:
  TypeIVImpl(double A, double c, double alpha, double rbar) : A_(A), c_(c), alpha_(alpha), rbar_(rbar) {
    shift_ = rbar_ - A_ * rbar_ * std::exp(c_ * std::pow(rbar_, -alpha_));
  }
  ModelSample sample(double r) const override {
    if (r <= rbar_) return flat_sample(r);
    const double phi = c_ * std::pow(r, -alpha_);
    const double ep = std::exp(phi);
    const double psi = A_ * r * ep + shift_;
    const double d1 = A_ * ep * (1.0 - alpha_ * phi);
    const double d2 = A_ * ep * alpha_ * phi * (alpha_ - 1.0 + alpha_ * phi) / r;
    return {std::log(psi), d1 / psi, d2 / psi};
  }

 private:
  double A_, c_, alpha_, rbar_, shift_;
};

class OdeImpl final : public ModelImpl {
 public:
  OdeImpl(LinearOdeSolution sol, Asymptotics asym, double r_seed)
      : sol_(std::move(sol)), asym_(asym), r_seed_(r_seed) {}

  ModelSample sample(double r) const override {
    if (r > sol_.r_end() * (1.0 + 1e-14)) {
      std::ostringstream os;
      os << "radius " << r << " beyond integrated range " << sol_.r_end();
      throw RangeError(os.str());
    }
    if (r <= r_seed_) return flat_sample(r);
    const auto loc = sol_.evaluate(std::min(r, sol_.r_end()));
    return {loc.log_psi, loc.g, loc.w};
  }

  bool defined_beyond_range() const override { return false; }

  double log_tail_integral(double R, double p) const override {
    const double r_end = sol_.r_end();
    if (R < r_end) return log_add_exp(log_power_integral(*this, R, r_end, -p), beyond(r_end, p));
    return beyond(R, p);
  }

 private:
  // Tail beyond the integrated range, closed from the asymptotic class.
  double beyond(double R, double p) const {
    const ModelSample s = sample(std::min(R, sol_.r_end()));
    const double lp = s.log_psi;
    switch (asym_.growth) {
      case GrowthClass::exponential: {
        // Laplace expansion with its first correction, g' = w - g^2.
        const double corr = -(s.w - s.g * s.g) / (p * s.g * s.g);
        return -p * lp - std::log(p * s.g) + std::log1p(corr);
      }
      case GrowthClass::linear: {
        if (p <= 1.0) throw NotApplicableError("tail integral diverges for linear growth and p <= 1");
        return -p * lp - std::log((p - 1.0) * s.g);
      }
      case GrowthClass::power: {
        // Exact continuation psi = c1 r^q + c2 r^{1-q} of psi'' = Q r^{-2} psi.
        const double q1 = asym_.q, q2 = 1.0 - asym_.q;
        const double a1 = (R * s.g - q2) / (q1 - q2);
        const double a2 = 1.0 - a1;
        if (p * q1 <= 1.0) throw NotApplicableError("tail integral diverges for this power growth");
        auto f = [&](double x) { return std::pow(a1 * std::pow(x, q1) + a2 * std::pow(x, q2), -p); };
        double acc = 0.0, lo = 1.0, len = 1.0, prev = 0.0;
        for (int k = 0; k < 2000; ++k) {
          const double seg = integrate(f, lo, lo + len, 1e-12, 12).value;
          acc += seg;
          if (k > 4 && prev > 0) {
            const double ratio = seg / prev;
            if (ratio < 1.0 && seg * ratio / (1.0 - ratio) < 1e-15 * acc) {
              acc += seg * ratio / (1.0 - ratio);
              break;
            }
          }
          prev = seg;
          lo += len;
          len *= 2.0;
        }
        return -p * lp + std::log(R) + std::log(acc);
      }
    }
    return 0.0;
  }

  LinearOdeSolution sol_;
  Asymptotics asym_;
  double r_seed_;
};

}  // namespace

double ModelImpl::log_tail_integral(double R, double p) const {
  // Doubling segments on the scaled integrand, closed by a geometric remainder.
  const ModelSample s0 = sample(R);
  const double L0 = s0.log_psi;
  auto f = [&](double t) { return std::exp(-p * (log_psi(t) - L0)); };
  double len = std::min(1.0 / (p * s0.g), std::max(R, 1e-3));
  double acc = 0.0, lo = R, prev = 0.0;
  for (int k = 0; k < 900; ++k) {
    const double seg = integrate(f, lo, lo + len, 1e-12, 12).value;
    acc += seg;
    if (seg == 0.0 && k > 2) break;
    if (k > 4 && prev > 0) {
      const double ratio = seg / prev;
      if (ratio < 1.0 && seg * ratio / (1.0 - ratio) < 1e-15 * acc) {
        acc += seg * ratio / (1.0 - ratio);
        return -p * L0 + std::log(acc);
      }
      if (k > 80 && ratio > 0.999) throw NotApplicableError("tail integral of psi^{-p} appears divergent");
    }
    prev = seg;
    lo += len;
    len *= 2.0;
    if (!std::isfinite(lo)) break;
  }
  if (acc <= 0 || !std::isfinite(acc)) throw NotApplicableError("tail integral of psi^{-p} appears divergent");
  return -p * L0 + std::log(acc);
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::euclidean: return "euclidean";
    case ModelKind::hyperbolic_sinh: return "hyperbolic_sinh";
    case ModelKind::type_I: return "type_I";
    case ModelKind::type_II: return "type_II";
    case ModelKind::type_IV: return "type_IV";
    case ModelKind::ode_defined: return "ode_defined";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "euclidean") return ModelKind::euclidean;
  if (s == "hyperbolic_sinh" || s == "hyperbolic") return ModelKind::hyperbolic_sinh;
  if (s == "type_I") return ModelKind::type_I;
  if (s == "type_II") return ModelKind::type_II;
  if (s == "type_IV") return ModelKind::type_IV;
  if (s == "ode_defined") return ModelKind::ode_defined;
  throw SchemaError("unknown geometry kind '" + s + "'");
}

// ---------------------------------------------------------------- CurvatureProfile

CurvatureProfile CurvatureProfile::upper(double Q, double mu, double R) {
  CurvatureProfile p;
  p.Q = Q;
  p.mu = mu;
  p.R = R;
  p.D = 0.0;
  p.branch = CurvatureBranch::upper;
  p.validate();
  return p;
}

CurvatureProfile CurvatureProfile::lower(double Q, double mu, double R, double D) {
  CurvatureProfile p;
  p.Q = Q;
  p.mu = mu;
  p.R = R;
  p.D = D;
  p.branch = CurvatureBranch::lower;
  p.validate();
  return p;
}

void CurvatureProfile::validate() const {
  if (!(Q > 0)) throw ConstraintError("Q > 0", "Q = " + std::to_string(Q));
  if (!(R > 0)) throw ConstraintError("R > 0", "R = " + std::to_string(R));
  if (branch == CurvatureBranch::lower) {
    if (!(D > 0)) throw ConstraintError("D > 0", "D = " + std::to_string(D));
    if (mu <= -1.0 || mu > 1.0) throw ConstraintError("mu in (-1, 1]", "lower branch");
  }
}

double CurvatureProfile::w(double r) const {
  const double top = Q * std::pow(2.0 * R, 2.0 * mu);
  if (branch == CurvatureBranch::upper) {
    if (r <= R) return 0.0;
    if (r <= 2.0 * R) return top * (r - R) / R;
    return Q * std::pow(r, 2.0 * mu);
  }
  if (mu < 0.0) {
    if (r <= R) return D;
    if (r <= 2.0 * R) return top * (r - R) / R + D * (2.0 * R - r) / R;
    return Q * std::pow(r, 2.0 * mu);
  }
  return std::max(D, Q * std::pow(r, 2.0 * mu));
}

std::vector<double> CurvatureProfile::breakpoints() const {
  if (branch == CurvatureBranch::upper || mu < 0.0) return {R, 2.0 * R};
  if (mu > 0.0) return {std::pow(D / Q, 1.0 / (2.0 * mu))};
  return {};
}

// ---------------------------------------------------------------- ModelFunction

ModelFunction::ModelFunction(std::shared_ptr<const ModelImpl> impl, ModelKind kind, int n, double r_max,
                             double r_bar, std::map<std::string, double> params, Asymptotics asym)
    : impl_(std::move(impl)),
      kind_(kind),
      n_(n),
      r_max_(r_max),
      r_bar_(r_bar),
      params_(std::move(params)),
      asym_(asym) {
  if (n_ < 2) throw ConstraintError("n >= 2", "n = " + std::to_string(n_));
}

ModelFunction ModelFunction::with_dimension(int n) const {
  ModelFunction m = *this;
  if (n < 2) throw ConstraintError("n >= 2", "n = " + std::to_string(n));
  m.n_ = n;
  return m;
}

ModelFunction ModelFunction::with_range(double r_max) const {
  if (!impl_->defined_beyond_range() && r_max > r_max_) throw RangeError("cannot extend an ODE-defined range");
  ModelFunction m = *this;
  m.r_max_ = r_max;
  return m;
}

ModelSample ModelFunction::sample(double r) const {
  if (!(r > 0.0)) throw RangeError("model function sampled at r <= 0");
  return impl_->sample(r);
}

double ModelFunction::log_psi(double r) const {
  if (!(r > 0.0)) throw RangeError("model function sampled at r <= 0");
  return impl_->log_psi(r);
}

double ModelFunction::psi(double r) const { return r == 0.0 ? 0.0 : std::exp(log_psi(r)); }
double ModelFunction::dpsi(double r) const {
  if (r == 0.0) return 1.0;
  const auto s = sample(r);
  return s.g * std::exp(s.log_psi);
}
double ModelFunction::ddpsi(double r) const {
  if (r == 0.0) return 0.0;
  const auto s = sample(r);
  return s.w * std::exp(s.log_psi);
}

double ModelFunction::log_tail_integral(double R, double p) const { return impl_->log_tail_integral(R, p); }

ModelFunction make_closed_form(ModelKind kind, const std::map<std::string, double>& params, int n, double r_max) {
  Asymptotics asym;
  switch (kind) {
    case ModelKind::euclidean:
      asym.growth = GrowthClass::linear;
      asym.a = 1.0;
      asym.mu = -std::numeric_limits<double>::infinity();
      return ModelFunction(std::make_shared<EuclideanImpl>(), kind, n, r_max, 0.0, params, asym);
    case ModelKind::hyperbolic_sinh:
      asym.growth = GrowthClass::exponential;
      asym.mu = 0.0;
      asym.Q = 1.0;
      return ModelFunction(std::make_shared<SinhImpl>(), kind, n, r_max, 0.0, params, asym);
    case ModelKind::type_I: {
      const double a1 = param(params, "a1"), alpha = param(params, "alpha"), A = param(params, "A");
      if (!(a1 > 0) || !(alpha > 0) || !(A > 0)) throw ConstraintError("a1, alpha, A > 0", "type_I");
      double rbar;
      if (alpha == 1.0) {
        if (!(A < 1.0 / a1)) throw ConstraintError("A < 1/a1", "type_I with alpha = 1");
        rbar = -std::log(a1 * A) / a1;
      } else {
        auto f = [&](double r) {
          return std::log(A * alpha * a1) + (alpha - 1.0) * std::log(r) + a1 * std::pow(r, alpha);
        };
        auto df = [&](double r) { return (alpha - 1.0) / r + a1 * alpha * std::pow(r, alpha - 1.0); };
        double lo = 1e-6;
        if (alpha < 1.0) {
          const double bound = (1.0 / (alpha * a1)) *
                               std::pow((1.0 - alpha) / (std::exp(1.0) * alpha * a1), (1.0 - alpha) / alpha);
          if (A > bound) {
            std::ostringstream os;
            os << "A = " << A << " exceeds " << bound;
            throw ConstraintError("A <= (1/(alpha a1)) ((1-alpha)/(e alpha a1))^((1-alpha)/alpha)", os.str());
          }
          lo = std::pow((1.0 - alpha) / (alpha * a1), 1.0 / alpha);
        }
        try {
          rbar = find_root(f, df, lo, 1e3, 1e-15, alpha < 1.0 ? 0 : 4);
        } catch (const NumericalError&) {
          throw NumericalError("type_I: no root for the matching radius in the search bracket");
        }
      }
      asym.growth = GrowthClass::exponential;
      asym.mu = alpha - 1.0;
      asym.Q = a1 * a1 * alpha * alpha;
      return ModelFunction(std::make_shared<TypeIImpl>(a1, alpha, A, rbar), kind, n, r_max, rbar, params, asym);
    }
    case ModelKind::type_II: {
      const double a1 = param(params, "a1"), alpha = param(params, "alpha");
      if (!(a1 > 0)) throw ConstraintError("a1 > 0", "type_II");
      if (!(alpha > 1)) throw ConstraintError("alpha > 1", "type_II");
      const double rbar = std::pow(a1 * alpha, -1.0 / (alpha - 1.0));
      asym.growth = GrowthClass::power;
      asym.mu = -1.0;
      asym.Q = alpha * (alpha - 1.0);
      asym.a = a1;
      asym.q = alpha;
      return ModelFunction(std::make_shared<TypeIIImpl>(a1, alpha, rbar), kind, n, r_max, rbar, params, asym);
    }
    case ModelKind::type_IV: {
      const double A = param(params, "A"), c = param(params, "c"), alpha = param(params, "alpha");
      if (!(A > 1)) throw ConstraintError("A > 1", "type_IV");
      const bool ok = (alpha > 1 && c > 0) || (alpha > 0 && alpha < 1 && c < 0);
      if (!ok) throw ConstraintError("alpha > 1, c > 0 or alpha in (0,1), c < 0", "type_IV");
      auto f = [&](double r) {
        const double phi = c * std::pow(r, -alpha);
        return std::log(A) + phi + std::log1p(-alpha * phi);
      };
      auto df = [&](double r) {
        const double phi = c * std::pow(r, -alpha);
        const double dphi = -alpha * phi / r;
        return dphi - alpha * dphi / (1.0 - alpha * phi);
      };
      // Below the root 1 - alpha phi may be negative; scan upward for the first admissible point.
      double lo = 1e-6;
      while (1.0 - alpha * c * std::pow(lo, -alpha) <= 0.0 && lo < 1e3) lo *= 1.5;
      double rbar;
      try {
        rbar = find_root(f, df, lo, 1e3, 1e-15, 0);
      } catch (const NumericalError&) {
        throw NumericalError("type_IV: no root for the matching radius in the search bracket");
      }
      asym.growth = GrowthClass::linear;
      asym.a = A;
      asym.mu = -1.0 - 0.5 * alpha;
      asym.Q = c * alpha * (alpha - 1.0);
      return ModelFunction(std::make_shared<TypeIVImpl>(A, c, alpha, rbar), kind, n, r_max, rbar, params, asym);
    }
    case ModelKind::ode_defined:
      break;
  }
  throw ConstraintError("closed form kind", "ode_defined geometries come from solve_psi_from_curvature");
}

ModelFunction solve_psi_from_curvature(const CurvatureProfile& profile, double r_max, int n, const OdeOptions& opts) {
  profile.validate();
  if (!(r_max > 2.0 * profile.R)) throw ConstraintError("r_max > 2R", "solve_psi_from_curvature");
  constexpr double eps = 1e-8;
  auto w = [profile](double r) { return profile.w(r); };
  // Seed: psi = r + w(0) r^3/6 + ..., negligible at eps.
  LinearOdeSolution sol =
      integrate_linear_second_order(w, eps, eps, 1.0, r_max, profile.breakpoints(), opts);
  Asymptotics asym;
  asym.mu = profile.mu;
  asym.Q = profile.Q;
  if (profile.mu > -1.0) {
    asym.growth = GrowthClass::exponential;
  } else if (profile.mu == -1.0) {
    asym.growth = GrowthClass::power;
    asym.q = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * profile.Q));
  } else {
    asym.growth = GrowthClass::linear;
  }
  const double psi_end = std::exp(sol.nodes().back().log_scale) * sol.nodes().back().y;
  if (asym.growth == GrowthClass::power) asym.a = psi_end / std::pow(r_max, asym.q);
  if (asym.growth == GrowthClass::linear) asym.a = std::exp(sol.nodes().back().log_scale) * sol.nodes().back().dy;
  std::map<std::string, double> params{{"Q", profile.Q}, {"mu", profile.mu}, {"R", profile.R}, {"D", profile.D}};
  ModelFunction mf(std::make_shared<OdeImpl>(std::move(sol), asym, eps), ModelKind::ode_defined, n, r_max, 0.0,
                   params, asym);
  mf.set_profile(profile);
  return mf;
}

Curvatures curvatures(const ModelFunction& psi, double r) {
  if (!(r > 0.0) || (r > psi.r_max() && !psi.evaluable_beyond_range()))
    throw RangeError("curvatures: r outside (0, r_max]");
  const ModelSample s = psi.sample(r);
  // H = (1 - psi'^2)/psi^2 = psi^{-2} - g^2.
  const double H = std::exp(-2.0 * s.log_psi) - s.g * s.g;
  const int n = psi.n();
  return {-s.w, H, -(n - 1) * s.w, (n - 1) * s.g};
}

RiccatiReport riccati_diagnostic(const ModelFunction& psi, double Q, double mu, double r_probe) {
  RiccatiReport rep;
  const auto& prof = psi.profile();
  const double R = prof ? prof->R : 1.0;
  if (!(r_probe >= 2.0 * R)) throw RangeError("riccati_diagnostic: r_probe must be at least 2R");
  if (r_probe > psi.r_max() && !psi.evaluable_beyond_range()) throw RangeError("riccati_diagnostic: r_probe > r_max");
  const ModelSample s = psi.sample(r_probe);
  rep.G = s.g / std::pow(r_probe, mu);
  rep.deviation = std::abs(rep.G / std::sqrt(Q) - 1.0);

  const ModelSample s2 = psi.sample(2.0 * R);
  const double G0 = s2.g / std::pow(2.0 * R, mu);
  const double rad = std::sqrt(Q + mu * mu / (4.0 * std::pow(2.0 * R, 2.0 * mu + 2.0)));
  const double shift = std::abs(mu) / (2.0 * std::pow(2.0 * R, mu + 1.0));
  rep.k_upper = std::max(shift + rad, G0);
  rep.k_lower = std::min(-shift + rad, G0);
  const double slack = 1e-9 * rep.k_upper;
  rep.within_sandwich = rep.G >= rep.k_lower - slack && rep.G <= rep.k_upper + slack;

  if (!prof || prof->branch != CurvatureBranch::upper || std::abs(prof->Q - Q) > 1e-14 * Q ||
      std::abs(prof->mu - mu) > 1e-14) {
    rep.applicable = false;
    rep.note = "geometry is not the upper-branch curvature profile with these (Q, mu); the limit G -> sqrt(Q) is not implied";
  }
  if (mu <= -1.0) {
    rep.applicable = false;
    rep.note = "mu <= -1 lies outside the Riccati limit statement";
  }
  return rep;
}

double log_shell_integral(const ModelFunction& psi, double a, double b) {
  if (b <= a) return -std::numeric_limits<double>::infinity();
  return log_power_integral(psi.impl(), std::max(a, 1e-300), b, psi.n() - 1.0);
}

double volume(const ModelFunction& psi, double R_ball) {
  if (R_ball < 0) throw RangeError("volume: negative radius");
  if (R_ball == 0.0) return 0.0;
  if (R_ball > psi.r_max() * (1 + 1e-14) && !psi.evaluable_beyond_range()) throw RangeError("volume: R > r_max");
  const int n = psi.n();
  // Near the origin psi ~ r; integrate the first piece with a substitution-free small interval.
  const double r0 = std::min(R_ball, 1e-6);
  double acc = std::log(std::pow(r0, n) / n);
  if (R_ball > r0) acc = log_add_exp(acc, log_shell_integral(psi, r0, R_ball));
  return sphere_area(n) * std::exp(acc);
}

double sup_w_on_ball(const ModelFunction& psi, double R, int samples) {
  double best = 0.0;
  for (int i = 1; i <= samples; ++i) best = std::max(best, psi.sample(R * i / samples).w);
  return best;
}

void write_psi_csv(const ModelFunction& psi, const std::string& path, int samples) {
  CsvWriter csv(path, {"r", "psi", "dpsi", "K", "Ric"});
  for (int i = 1; i <= samples; ++i) {
    const double r = psi.r_max() * i / samples;
    const auto c = curvatures(psi, r);
    csv.row({r, psi.psi(r), psi.dpsi(r), c.K_radial, c.Ric_radial});
  }
}

}  // namespace pmelab
