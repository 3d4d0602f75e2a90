#include "pmelab/chvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

namespace {

constexpr double r_first = 1e-6;

// Geometric near the origin, then steps short enough that psi^{-p} changes by a bounded factor.
std::vector<double> radial_nodes(const ModelFunction& psi, double p) {
  std::vector<double> r = geomspace(r_first, 0.5, 80);
  const double r_max = psi.r_max();
  double x = 0.5;
  while (x < r_max) {
    const double g = std::abs(psi.sample(x).g);
    const double h = std::min(0.05, 1.0 / std::max(1e-300, p * g));
    x = (x + h >= r_max - 0.25 * h) ? r_max : x + h;
    r.push_back(x);
  }
  return r;
}

// d^2 log s / d r^2 for ds / s^{N-1} = dr / psi^p.
double power_dslope(const ModelFunction& psi, double r, double slope, double N, double p) {
  return slope * ((N - 2.0) * slope - p * psi.sample(r).g);
}

}  // namespace

std::string to_string(WeightClass c) {
  switch (c) {
    case WeightClass::inv_square_log: return "inv_square_log";
    case WeightClass::power: return "power";
    case WeightClass::log_power: return "log_power";
    case WeightClass::constant: return "constant";
    case WeightClass::unknown: return "unknown";
  }
  return "unknown";
}

// ---------------------------------------------------------------- WeightProfile

WeightProfile::WeightProfile(double dimension, double s_max, LogRho log_rho, SDLogRho s_dlog, WeightClass cls,
                             std::map<std::string, double> class_params)
    : dim_(dimension),
      s_max_(s_max),
      log_rho_(std::move(log_rho)),
      s_dlog_(std::move(s_dlog)),
      cls_(cls),
      params_(std::move(class_params)) {}

WeightProfile WeightProfile::constant(double dimension, double value, double s_max) {
  const double lv = std::log(value);
  return WeightProfile(
      dimension, s_max, [lv](double) { return lv; }, [](double) { return 0.0; }, WeightClass::constant,
      {{"c", value}});
}

WeightProfile WeightProfile::inverse_square_log(double dimension, double c, double nu, double s_max) {
  // rho = 1 / (1 + s^2 (log(e + s))^nu / c): rho(0) = 1, rho ~ c / (s^2 (log s)^nu).
  auto lr = [c, nu](double s) {
    const double l = std::log(std::exp(1.0) + s);
    return -std::log1p(s * s * std::pow(l, nu) / c);
  };
  auto sd = [c, nu](double s) {
    const double l = std::log(std::exp(1.0) + s);
    const double x = s * s * std::pow(l, nu) / c;
    const double sdx = x * (2.0 + nu * s / ((std::exp(1.0) + s) * l));
    return -sdx / (1.0 + x);
  };
  return WeightProfile(dimension, s_max, lr, sd, WeightClass::inv_square_log, {{"c", c}, {"nu", nu}});
}

WeightProfile WeightProfile::power_law(double dimension, double p, double s_max) {
  auto lr = [p](double s) { return -0.5 * p * std::log1p(s * s); };
  auto sd = [p](double s) { return -p * s * s / (1.0 + s * s); };
  return WeightProfile(dimension, s_max, lr, sd, WeightClass::power, {{"p", p}, {"c", 1.0}});
}

// ---------------------------------------------------------------- ChangeOfVariables

std::size_t ChangeOfVariables::locate_r(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r, [](double x, const Node& nd) { return x < nd.r; });
  std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  if (j == 0) return 0;
  return std::min(j - 1, nodes_.size() - 2);
}

std::size_t ChangeOfVariables::locate_log_s(double ls) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), ls,
                             [](double x, const Node& nd) { return x < nd.log_s; });
  std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  if (j == 0) return 0;
  return std::min(j - 1, nodes_.size() - 2);
}

namespace {

// Fixed-order rule, accurate on node intervals where the integrand changes by O(1) at most.
template <class F>
double gl(F f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// Quintic Hermite interpolant from values and first two derivatives at both ends.
double quintic(double x, double xa, double xb, double ya, double da, double sa, double yb, double db, double sb) {
  const double h = xb - xa, t = (x - xa) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), h3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5, h5 = 0.5 * (t3 - 2 * t4 + t5);
  return h0 * ya + h1 * h * da + h2 * h * h * sa + h3 * yb + h4 * h * db + h5 * h * h * sb;
}

}  // namespace

double ChangeOfVariables::log_forward_in(std::size_t j, double r) const {
  const Node& a = nodes_[j];
  const Node& b = nodes_[j + 1];
  switch (mode_) {
    case ChvarMode::standard_n_ge_3:
    case ChvarMode::dim_lift_2d: {
      const double ref = psi_->log_psi(r), p = p_;
      const double v = gl([&](double t) { return std::exp(-p * (psi_->log_psi(t) - ref)); }, r, b.r);
      const double lI = log_add_exp(log_I_[j + 1], std::log(v) - p * ref);
      return -(std::log(N_ - 2.0) + lI) / (N_ - 2.0);
    }
    case ChvarMode::log_map_2d: {
      const double v = gl([&](double t) { return std::exp(-psi_->log_psi(t)) - 1.0 / t; }, a.r, r);
      return std::log(r) + (a.log_s - std::log(a.r)) + v;
    }
    case ChvarMode::inverse: {
      double sg = quintic(r, a.r, b.r, a.log_s, a.slope, a.dslope, b.log_s, b.slope, b.dslope);
      sg = std::clamp(sg, a.log_s, b.log_s);
      for (int it = 0; it < 6; ++it) {
        const double f = r_of_log_s_in(j, sg) - r;
        const double next = std::clamp(sg - f * dlogs_dr_at(r, sg), a.log_s, b.log_s);
        const bool done = std::abs(next - sg) < 1e-15 * std::max(1.0, std::abs(sg));
        sg = next;
        if (done) break;
      }
      return sg;
    }
  }
  return 0.0;
}

double ChangeOfVariables::r_of_log_s_in(std::size_t j, double ls) const {
  const Node& a = nodes_[j];
  const Node& b = nodes_[j + 1];
  if (mode_ == ChvarMode::inverse) {
    const WeightProfile& w = *source_weight_;
    return a.r + gl([&](double sg) { return std::exp(sg + 0.5 * w.log_rho(std::exp(sg))); }, a.log_s, ls);
  }
  // r(log s) has derivatives 1/slope and -dslope/slope^3.
  auto d1 = [](const Node& nd) { return 1.0 / nd.slope; };
  auto d2 = [](const Node& nd) { return -nd.dslope / (nd.slope * nd.slope * nd.slope); };
  double r = quintic(ls, a.log_s, b.log_s, a.r, d1(a), d2(a), b.r, d1(b), d2(b));
  r = std::clamp(r, a.r, b.r);
  for (int it = 0; it < 6; ++it) {
    const double f = log_forward_in(j, r) - ls;
    const double next = std::clamp(r - f / dlogs_dr_at(r, ls), a.r, b.r);
    const bool done = std::abs(next - r) < 1e-15 * r;
    r = next;
    if (done) break;
  }
  return r;
}

double ChangeOfVariables::dlogs_dr_at(double r, double ls) const {
  switch (mode_) {
    case ChvarMode::standard_n_ge_3:
    case ChvarMode::dim_lift_2d:
      return std::exp((N_ - 2.0) * ls - p_ * psi_->log_psi(r));
    case ChvarMode::log_map_2d:
      return std::exp(-psi_->log_psi(r));
    case ChvarMode::inverse:
      return std::exp(-ls - 0.5 * source_weight_->log_rho(std::exp(ls)));
  }
  return 0.0;
}

double ChangeOfVariables::log_forward(double r) const {
  if (!(r > 0)) throw RangeError("change of variables evaluated at r <= 0");
  if (r > r_max() * (1 + 1e-12)) throw RangeError("change of variables evaluated beyond r_max");
  const Node& n0 = nodes_.front();
  if (r <= n0.r) return std::log(r) + (n0.log_s - std::log(n0.r));
  const std::size_t j = locate_r(r);
  if (r == nodes_[j].r) return nodes_[j].log_s;
  if (r >= nodes_[j + 1].r) return nodes_[j + 1].log_s;
  return log_forward_in(j, r);
}

double ChangeOfVariables::forward(double r) const { return std::exp(log_forward(r)); }

double ChangeOfVariables::dlogs_dr(double r) const { return dlogs_dr_at(r, log_forward(r)); }

double ChangeOfVariables::inverse_log(double ls) const {
  const Node& n0 = nodes_.front();
  if (ls <= n0.log_s) return std::exp(ls - n0.log_s) * n0.r;
  if (ls > nodes_.back().log_s + 1e-12 * std::max(1.0, std::abs(ls)))
    throw RangeError("inverse change of variables evaluated beyond s_max");
  const std::size_t j = locate_log_s(ls);
  if (ls == nodes_[j].log_s) return nodes_[j].r;
  if (ls >= nodes_[j + 1].log_s) return nodes_[j + 1].r;
  return r_of_log_s_in(j, ls);
}

double ChangeOfVariables::inverse(double s) const { return inverse_log(std::log(s)); }

// ---------------------------------------------------------------- builders

ChangeOfVariables forward_map(const ModelFunction& psi, int n) {
  if (n < 3) throw ConstraintError("n >= 3", "forward_map needs n >= 3; use dim_lift_2d or log_map_2d");
  ChangeOfVariables cov;
  cov.mode_ = ChvarMode::standard_n_ge_3;
  cov.n_ = n;
  cov.N_ = n;
  cov.p_ = n - 1.0;
  const ModelFunction geo = psi.with_dimension(n);
  cov.psi_ = geo;

  const std::vector<double> r = radial_nodes(geo, cov.p_);
  std::vector<double> lI(r.size());
  try {
    lI.back() = geo.log_tail_integral(r.back(), cov.p_);
  } catch (const NotApplicableError& e) {
    throw NotApplicableError(std::string("forward_map: ") + e.what() +
                             "; use log_map_2d, dim_lift_2d or the quasi-Euclidean handling");
  }
  for (std::size_t j = r.size() - 1; j-- > 0;)
    lI[j] = log_add_exp(lI[j + 1], log_power_integral(geo, r[j], r[j + 1], -cov.p_));
  for (std::size_t j = 0; j < r.size(); ++j)
    cov.nodes_.push_back({r[j], -(std::log(n - 2.0) + lI[j]) / (n - 2.0)});
  cov.log_I_ = lI;
  for (auto& nd : cov.nodes_) {
    nd.slope = std::exp((n - 2.0) * nd.log_s - cov.p_ * geo.log_psi(nd.r));
    nd.dslope = power_dslope(geo, nd.r, nd.slope, n, cov.p_);
  }

  const double s_max = std::exp(cov.nodes_.back().log_s);
  auto self = std::make_shared<ChangeOfVariables>(cov);
  const double p = cov.p_, N = cov.N_;
  auto lr = [self, geo, p, N](double s) {
    const double rr = self->inverse(s);
    return 2.0 * p * geo.log_psi(rr) - 2.0 * (N - 1.0) * std::log(s);
  };
  auto sd = [self, geo, p, N](double s) {
    const double rr = self->inverse(s);
    const auto smp = geo.sample(rr);
    return 2.0 * p * std::exp(std::log(smp.g) + p * smp.log_psi - (N - 2.0) * std::log(s)) - 2.0 * (N - 1.0);
  };
  const auto& as = geo.asymptotics();
  WeightClass cls = WeightClass::unknown;
  std::map<std::string, double> cp;
  if (as.growth == GrowthClass::exponential) {
    cls = WeightClass::inv_square_log;
    cp["nu"] = 2.0 * as.mu / (1.0 + as.mu);
  } else if (as.growth == GrowthClass::power) {
    cls = WeightClass::power;
    cp["p"] = p_q(n, as.q);
  } else {
    cls = WeightClass::constant;
    cp["c"] = std::pow(as.a, -2.0 * (n - 1.0) / (n - 2.0));
  }
  cov.weight_ = std::make_shared<WeightProfile>(n, s_max, lr, sd, cls, cp);
  return cov;
}

ChangeOfVariables dim_lift_2d(const ModelFunction& psi, double n1) {
  if (psi.n() != 2) throw ConstraintError("n = 2", "dim_lift_2d lifts two-dimensional models");
  if (!(n1 > 2)) throw ConstraintError("n1 > 2", "lifted dimension must exceed 2; n1 = 2 makes rho singular");
  ChangeOfVariables cov;
  cov.mode_ = ChvarMode::dim_lift_2d;
  cov.n_ = 2;
  cov.N_ = n1;
  cov.p_ = 1.0;
  cov.psi_ = psi;
  const std::vector<double> r = radial_nodes(psi, 1.0);
  std::vector<double> lI(r.size());
  try {
    lI.back() = psi.log_tail_integral(r.back(), 1.0);
  } catch (const NotApplicableError&) {
    throw NotApplicableError("dim_lift_2d: the integral of 1/psi diverges; use log_map_2d");
  }
  for (std::size_t j = r.size() - 1; j-- > 0;)
    lI[j] = log_add_exp(lI[j + 1], log_power_integral(psi, r[j], r[j + 1], -1.0));
  for (std::size_t j = 0; j < r.size(); ++j)
    cov.nodes_.push_back({r[j], -(std::log(n1 - 2.0) + lI[j]) / (n1 - 2.0)});
  cov.log_I_ = lI;
  for (auto& nd : cov.nodes_) {
    nd.slope = std::exp((n1 - 2.0) * nd.log_s - psi.log_psi(nd.r));
    nd.dslope = power_dslope(psi, nd.r, nd.slope, n1, 1.0);
  }

  auto self = std::make_shared<ChangeOfVariables>(cov);
  auto lr = [self, psi, n1](double s) {
    return 2.0 * psi.log_psi(self->inverse(s)) - 2.0 * (n1 - 1.0) * std::log(s);
  };
  auto sd = [self, psi, n1](double s) {
    const auto smp = psi.sample(self->inverse(s));
    return 2.0 * std::exp(std::log(smp.g) + smp.log_psi - (n1 - 2.0) * std::log(s)) - 2.0 * (n1 - 1.0);
  };
  const auto& as = psi.asymptotics();
  WeightClass cls = WeightClass::unknown;
  std::map<std::string, double> cp;
  if (as.growth == GrowthClass::power) {
    cls = WeightClass::power;
    cp["p"] = -2.0 * (n1 - as.q - 1.0) / (as.q - 1.0);
  }
  cov.weight_ = std::make_shared<WeightProfile>(n1, std::exp(cov.nodes_.back().log_s), lr, sd, cls, cp);
  std::const_pointer_cast<WeightProfile>(cov.weight_)->set_vanishes_at_origin(true);
  return cov;
}

ChangeOfVariables log_map_2d(const ModelFunction& psi) {
  if (psi.n() != 2) throw ConstraintError("n = 2", "log_map_2d applies to two-dimensional models");
  ChangeOfVariables cov;
  cov.mode_ = ChvarMode::log_map_2d;
  cov.n_ = 2;
  cov.N_ = 2;
  cov.p_ = 1.0;
  cov.psi_ = psi;
  const std::vector<double> r = radial_nodes(psi, 1.0);
  auto f = [&psi](double t) { return std::exp(-psi.log_psi(t)) - 1.0 / t; };
  double J = 0.0;  // integral of (1/psi - 1/t) from 0, negligible below the first node
  cov.nodes_.push_back({r[0], std::log(r[0])});
  for (std::size_t j = 1; j < r.size(); ++j) {
    J += integrate(f, r[j - 1], r[j], 1e-12, 12).value;
    cov.nodes_.push_back({r[j], std::log(r[j]) + J});
  }
  for (auto& nd : cov.nodes_) {
    nd.slope = std::exp(-psi.log_psi(nd.r));
    nd.dslope = -psi.sample(nd.r).g * nd.slope;
  }
  // A: log s(r) = A + integral_1^r dt/psi, chosen so that s(r)/r -> 1 at the origin.
  cov.log_A_ = (r.back() >= 1.0) ? cov.log_forward(1.0) : 0.0;

  auto self = std::make_shared<ChangeOfVariables>(cov);
  auto lr = [self, psi](double s) { return 2.0 * psi.log_psi(self->inverse(s)) - 2.0 * std::log(s); };
  auto sd = [self, psi](double s) { return 2.0 * (psi.dpsi(self->inverse(s)) - 1.0); };
  cov.weight_ = std::make_shared<WeightProfile>(2.0, std::exp(cov.nodes_.back().log_s), lr, sd, WeightClass::unknown);
  return cov;
}

namespace {

constexpr double s_first = 1e-6;

}  // namespace

class InverseModelImpl final : public ModelImpl {
 public:
  explicit InverseModelImpl(std::shared_ptr<const ChangeOfVariables> cov) : cov_(std::move(cov)) {}

  ModelSample sample(double r) const override {
    const auto loc = local(r);
    const double h = 1e-5 * std::min(r, 1.0);
    const double gp = local(r + h).g, gm = local(r - h).g;
    return {loc.log_psi, loc.g, (gp - gm) / (2.0 * h) + loc.g * loc.g};
  }
  double log_psi(double r) const override { return local(r).log_psi; }
  bool defined_beyond_range() const override { return false; }

 private:
  struct Local {
    double log_psi, g;
  };
  Local local(double r) const {
    const WeightProfile& w = *cov_->source_weight_;
    const int n = cov_->n_;
    const double ls = cov_->log_forward(r);
    const double s = std::exp(ls);
    const double lrho = w.log_rho(s);
    const double lp = ls + lrho / (2.0 * (n - 1.0));
    const double g = std::exp(-ls - 0.5 * lrho) * (1.0 + w.s_drho_over_rho(s) / (2.0 * (n - 1.0)));
    return {lp, g};
  }
  std::shared_ptr<const ChangeOfVariables> cov_;
};

ChangeOfVariables inverse_map(const WeightProfile& rho, int n) {
  if (n < 3) throw ConstraintError("n >= 3", "inverse_map needs n >= 3");
  const auto& cp = rho.class_params();
  if (rho.asymptotic_class() == WeightClass::inv_square_log && cp.count("nu") && cp.at("nu") > 2.0)
    throw NotApplicableError("inverse_map: the integral of sqrt(rho) converges (nu > 2)");
  if (rho.asymptotic_class() == WeightClass::power && cp.count("p") && cp.at("p") > 2.0)
    throw NotApplicableError("inverse_map: the integral of sqrt(rho) converges (p > 2)");

  ChangeOfVariables cov;
  cov.mode_ = ChvarMode::inverse;
  cov.n_ = n;
  cov.N_ = n;
  cov.p_ = n - 1.0;
  cov.source_weight_ = std::make_shared<WeightProfile>(rho);
  cov.weight_ = cov.source_weight_;

  const double l0 = std::log(s_first), l1 = std::log(rho.s_max());
  const int m = std::max(100, static_cast<int>(std::ceil((l1 - l0) / 0.02)));
  auto dr = [&rho](double sg) { return std::exp(sg + 0.5 * rho.log_rho(std::exp(sg))); };
  auto node = [&rho](double r, double sg) {
    const double s = std::exp(sg);
    const double slope = std::exp(-sg - 0.5 * rho.log_rho(s));
    return ChangeOfVariables::Node{r, sg, slope, -slope * slope * (1.0 + 0.5 * rho.s_drho_over_rho(s))};
  };
  double r = s_first * std::exp(0.5 * rho.log_rho(s_first));
  cov.nodes_.push_back(node(r, l0));
  for (int i = 1; i <= m; ++i) {
    const double a = l0 + (l1 - l0) * (i - 1) / m, b = i == m ? l1 : l0 + (l1 - l0) * i / m;
    r += integrate(dr, a, b, 1e-12, 10).value;
    cov.nodes_.push_back(node(r, b));
  }
  auto self = std::make_shared<ChangeOfVariables>(cov);
  std::map<std::string, double> params;
  Asymptotics asym;
  cov.psi_rt_ = ModelFunction(std::make_shared<InverseModelImpl>(self), ModelKind::ode_defined, n, r, 0.0, params,
                              asym);
  return cov;
}

double p_q(int n, double q) { return 2.0 * (n - 1.0) * (q - 1.0) / ((n - 1.0) * q - 1.0); }

// ---------------------------------------------------------------- weight classes

std::string Table1Report::to_text() const {
  std::ostringstream os;
  os << "predicted_form = " << predicted_form << '\n'
     << "predicted_class = " << to_string(predicted_class) << '\n'
     << "s_range = [" << format_double(s_lo) << ", " << format_double(s_hi) << "]\n"
     << "exponent_pred = " << format_double(exponent_pred) << '\n'
     << "exponent_fit = " << format_double(exponent_fit) << '\n'
     << "exponent_dev = " << format_double(exponent_dev) << '\n'
     << "constant_pred = " << format_double(constant_pred) << '\n'
     << "constant_fit = " << format_double(constant_fit) << '\n'
     << "constant_dev = " << format_double(constant_dev) << '\n'
     << "super_euclidean = " << (super_euclidean ? "true" : "false") << '\n'
     << "s_drho_over_rho_at_s_hi = " << format_double(s_dlog_at_hi) << '\n';
  return os.str();
}

Table1Report verify_table1(const ModelFunction& psi, const ChangeOfVariables& cov, double s_lo, double s_hi) {
  Table1Report rep;
  const WeightProfile& w = cov.weight();
  if (s_hi <= 0) s_hi = w.s_max();
  if (s_lo <= 0) s_lo = s_hi / 100.0;
  if (s_hi > w.s_max() * (1 + 1e-12)) throw RangeError("verify_table1: s_hi beyond the sampled range");
  if (s_hi / s_lo < 10.0) throw NumericalError("verify_table1: insufficient s-range for a stable fit (< 1 decade)");
  rep.s_lo = s_lo;
  rep.s_hi = s_hi;

  const std::vector<double> s = geomspace(s_lo, s_hi, 41);
  std::vector<double> ls, lls, lrho, ones(s.size(), 1.0);
  for (double x : s) {
    ls.push_back(std::log(x));
    lls.push_back(std::log(std::log(x)));
    lrho.push_back(w.log_rho(x));
  }
  const auto& as = psi.asymptotics();
  const int n = cov.manifold_dimension();
  rep.super_euclidean = as.growth == GrowthClass::exponential;
  rep.s_dlog_at_hi = w.s_drho_over_rho(s_hi);

  if (cov.mode() == ChvarMode::standard_n_ge_3 && as.growth == GrowthClass::exponential) {
    const double mu = as.mu, Q = as.Q;
    const double nu = 2.0 * mu / (1.0 + mu);
    rep.predicted_class = WeightClass::inv_square_log;
    rep.predicted_form = "rho ~ c / (s^2 (log s)^nu)";
    rep.exponent_pred = nu;
    rep.constant_pred = std::pow((n - 2.0) / (n - 1.0), 2.0) / Q *
                        std::pow((1.0 + mu) * (n - 2.0) / ((n - 1.0) * std::sqrt(Q)), -nu);
    std::vector<double> y;
    for (std::size_t i = 0; i < s.size(); ++i) y.push_back(lrho[i] + 2.0 * ls[i]);
    const auto fit = least_squares({ones, lls}, y);
    rep.exponent_fit = -fit.beta[1];
    rep.constant_fit = std::exp(fit.beta[0]);
  } else if (as.growth == GrowthClass::power) {
    rep.predicted_class = WeightClass::power;
    double a = as.a, q = as.q;
    if (cov.mode() == ChvarMode::dim_lift_2d) {
      const double n1 = cov.lift_dimension();
      rep.predicted_form = "rho ~ c s^{2(n1-q-1)/(q-1)}";
      rep.exponent_pred = 2.0 * (n1 - q - 1.0) / (q - 1.0);
      rep.constant_pred = std::numeric_limits<double>::quiet_NaN();
    } else {
      rep.predicted_form = "rho ~ c1 s^{-p_q}";
      rep.exponent_pred = -p_q(n, q);
      const double k = (n - 1.0) * q - 1.0;
      const double c = std::pow(a, -(n - 1.0) / k) * std::pow((n - 2.0) / k, 1.0 / k);
      rep.constant_pred = std::pow(a, 2.0 * (n - 1.0)) * std::pow(c, 2.0 * (n - 1.0) * q);
    }
    const auto fit = least_squares({ones, ls}, lrho);
    rep.exponent_fit = fit.beta[1];
    rep.constant_fit = std::exp(fit.beta[0]);
  } else if (cov.mode() == ChvarMode::standard_n_ge_3) {
    rep.predicted_class = WeightClass::constant;
    rep.predicted_form = "rho -> a^{-2(n-1)/(n-2)}";
    rep.exponent_pred = 0.0;
    rep.constant_pred = std::pow(as.a, -2.0 * (n - 1.0) / (n - 2.0));
    const auto fit = least_squares({ones, ls}, lrho);
    rep.exponent_fit = fit.beta[1];
    rep.constant_fit = std::exp(lrho.back());
  } else {
    rep.predicted_class = WeightClass::unknown;
    rep.predicted_form = "not tabulated for this mode";
    const auto fit = least_squares({ones, ls}, lrho);
    rep.exponent_fit = fit.beta[1];
    rep.constant_fit = std::exp(fit.beta[0]);
    rep.exponent_pred = std::numeric_limits<double>::quiet_NaN();
    rep.constant_pred = std::numeric_limits<double>::quiet_NaN();
  }
  rep.exponent_dev = rep.exponent_pred == 0.0 ? std::abs(rep.exponent_fit)
                                               : std::abs(rep.exponent_fit / rep.exponent_pred - 1.0);
  rep.constant_dev = std::abs(rep.constant_fit / rep.constant_pred - 1.0);
  return rep;
}

void write_rho_csv(const ChangeOfVariables& cov, const std::string& path) {
  CsvWriter csv(path, {"r", "s", "rho", "s_drho_over_rho"});
  const WeightProfile& w = cov.weight();
  for (const auto& nd : cov.nodes()) {
    const double s = std::exp(nd.log_s);
    csv.row({nd.r, s, w.rho(s), w.s_drho_over_rho(s)});
  }
}

}  // namespace pmelab
