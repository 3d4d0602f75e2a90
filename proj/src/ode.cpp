#include "pmelab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmelab/errors.hpp"

namespace pmelab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double rescale_threshold = 1e100;
const double log_rescale = std::log(rescale_threshold);

}  // namespace

LinearOdeSolution::LinearOdeSolution(std::vector<Node> nodes, std::function<double(double)> w)
    : nodes_(std::move(nodes)), w_(std::move(w)) {}

LinearOdeSolution::Local LinearOdeSolution::evaluate(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r,
                             [](double x, const Node& nd) { return x < nd.r; });
  std::size_t k1 = static_cast<std::size_t>(it - nodes_.begin());
  if (k1 == 0) k1 = 1;
  if (k1 >= nodes_.size()) k1 = nodes_.size() - 1;
  const Node& a = nodes_[k1 - 1];
  const Node& b = nodes_[k1];
  if (r == a.r) return {a.log_scale + std::log(a.y), a.dy / a.y, a.w};
  if (r == b.r) return {b.log_scale + std::log(b.y), b.dy / b.y, b.w};

  const double f = std::exp(b.log_scale - a.log_scale);
  const double y0 = a.y, d0 = a.dy, s0 = a.w * a.y;
  const double y1 = b.y * f, d1 = b.dy * f, s1 = b.w * b.y * f;
  const double h = b.r - a.r;
  const double t = (r - a.r) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double H3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 0.5 * t3 - t4 + 0.5 * t5;

  const double D0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double D1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double D2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  const double D3 = 30 * t2 - 60 * t3 + 30 * t4;
  const double D4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double D5 = 1.5 * t2 - 4 * t3 + 2.5 * t4;

  const double y = y0 * H0 + h * d0 * H1 + h * h * s0 * H2 + y1 * H3 + h * d1 * H4 + h * h * s1 * H5;
  const double dy = (y0 * D0 + y1 * D3) / h + d0 * D1 + d1 * D4 + h * (s0 * D2 + s1 * D5);
  return {a.log_scale + std::log(y), dy / y, w_(r)};
}

LinearOdeSolution integrate_linear_second_order(const std::function<double(double)>& w, double r0,
                                                double psi0, double dpsi0, double r_end,
                                                std::vector<double> breakpoints, const OdeOptions& opts) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                   [&](double b) { return b <= r0 || b >= r_end; }),
                    breakpoints.end());
  breakpoints.push_back(r_end);

  std::vector<LinearOdeSolution::Node> nodes;
  double r = r0, y = psi0, dy = dpsi0, log_scale = 0.0;
  nodes.push_back({r, y, dy, w(r), log_scale});

  double h = opts.h_initial;
  std::size_t next_bp = 0;
  std::size_t steps = 0;

  // The system is (y, dy)' = (dy, w y); stage derivatives are evaluated in place.
  while (r < r_end) {
    const double target = breakpoints[next_bp];
    bool hits = false;
    if (r + h >= target) {
      h = target - r;
      hits = true;
    }
    if (h < opts.h_min_factor * std::max(1.0, std::abs(r))) {
      std::ostringstream os;
      os << "ODE step-size underflow; last accepted r = " << r;
      throw NumericalError(os.str());
    }
    if (++steps > opts.max_steps) {
      std::ostringstream os;
      os << "ODE step budget exhausted; last accepted r = " << r;
      throw NumericalError(os.str());
    }

    const double k1y = dy, k1d = w(r) * y;
    double ty = y + h * a21 * k1y, td = dy + h * a21 * k1d;
    const double k2y = td, k2d = w(r + c2 * h) * ty;
    ty = y + h * (a31 * k1y + a32 * k2y);
    td = dy + h * (a31 * k1d + a32 * k2d);
    const double k3y = td, k3d = w(r + c3 * h) * ty;
    ty = y + h * (a41 * k1y + a42 * k2y + a43 * k3y);
    td = dy + h * (a41 * k1d + a42 * k2d + a43 * k3d);
    const double k4y = td, k4d = w(r + c4 * h) * ty;
    ty = y + h * (a51 * k1y + a52 * k2y + a53 * k3y + a54 * k4y);
    td = dy + h * (a51 * k1d + a52 * k2d + a53 * k3d + a54 * k4d);
    const double k5y = td, k5d = w(r + c5 * h) * ty;
    ty = y + h * (a61 * k1y + a62 * k2y + a63 * k3y + a64 * k4y + a65 * k5y);
    td = dy + h * (a61 * k1d + a62 * k2d + a63 * k3d + a64 * k4d + a65 * k5d);
    const double r_new = hits ? target : r + h;
    const double k6y = td, k6d = w(r + h) * ty;
    const double yn = y + h * (b1 * k1y + b3 * k3y + b4 * k4y + b5 * k5y + b6 * k6y);
    const double dn = dy + h * (b1 * k1d + b3 * k3d + b4 * k4d + b5 * k5d + b6 * k6d);
    const double w_new = w(r_new);
    const double k7y = dn, k7d = w_new * yn;
    const double ey = h * (e1 * k1y + e3 * k3y + e4 * k4y + e5 * k5y + e6 * k6y + e7 * k7y);
    const double ed = h * (e1 * k1d + e3 * k3d + e4 * k4d + e5 * k5d + e6 * k6d + e7 * k7d);

    const double sy = opts.abs_tol + opts.rel_tol * std::max(std::abs(y), std::abs(yn));
    const double sd = opts.abs_tol + opts.rel_tol * std::max(std::abs(dy), std::abs(dn));
    const double err = std::sqrt(0.5 * ((ey / sy) * (ey / sy) + (ed / sd) * (ed / sd)));

    if (!std::isfinite(err)) {
      h *= 0.2;
      continue;
    }
    if (err <= 1.0) {
      r = r_new;
      y = yn;
      dy = dn;
      if (std::abs(y) > rescale_threshold) {
        y /= rescale_threshold;
        dy /= rescale_threshold;
        log_scale += log_rescale;
      }
      nodes.push_back({r, y, dy, w_new, log_scale});
      if (hits) ++next_bp;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return LinearOdeSolution(std::move(nodes), w);
}

}  // namespace pmelab
