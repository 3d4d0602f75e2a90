#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace pmelab {

constexpr double pi = 3.14159265358979323846;

// Area of the unit (n-1)-sphere in R^n.
double sphere_area(int n);

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, int max_depth = 20);

// Bisection to locate a sign change, then Newton polish. The bracket is widened
// geometrically (lo/=10, hi*=10) up to `widen` times if it does not enclose a root.
// Throws NumericalError when no sign change is found.
double find_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                 double lo, double hi, double rel_tol = 1e-14, int widen = 4);

// Ordinary least squares y ~ X beta. Returns coefficients, their standard errors and the RSS.
struct LstsqResult {
  std::vector<double> beta;
  std::vector<double> stderr_;
  double rss = 0.0;
  double cond = 0.0;
};
LstsqResult least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y);

// Uniformly spaced values in [a, b] with n points.
std::vector<double> linspace(double a, double b, int n);
// Geometric spacing in [a, b] with n points, a, b > 0.
std::vector<double> geomspace(double a, double b, int n);

}  // namespace pmelab
