#include "pmelab/numerics.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pmelab/errors.hpp"

namespace pmelab {

double sphere_area(int n) {
  if (n < 1) throw RangeError("sphere_area: dimension must be positive");
  return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     int max_depth) {
  QuadResult out;
  if (a == b) return out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol,
                                                                          &out.error);
  if (!std::isfinite(out.value)) throw NumericalError("quadrature produced a non-finite value");
  return out;
}

double find_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                 double lo, double hi, double rel_tol, int widen) {
  double flo = f(lo), fhi = f(hi);
  int tries = 0;
  while (std::signbit(flo) == std::signbit(fhi) && flo != 0.0 && fhi != 0.0) {
    if (tries++ >= widen) throw NumericalError("find_root: no sign change in search bracket");
    lo /= 10.0;
    hi *= 10.0;
    flo = f(lo);
    fhi = f(hi);
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * std::abs(hi); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    double step = f(x) / d;
    double next = x - step;
    if (next <= lo || next >= hi) break;
    x = next;
    if (std::abs(step) <= rel_tol * std::abs(x)) break;
  }
  return x;
}

LstsqResult least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
  const auto rows = static_cast<Eigen::Index>(y.size());
  const auto cols = static_cast<Eigen::Index>(columns.size());
  if (rows <= cols) throw NumericalError("least_squares: not enough samples");
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd Y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Y(i) = y[i];
    for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = columns[j][i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::VectorXd beta = qr.solve(Y);
  Eigen::VectorXd res = Y - X * beta;
  LstsqResult out;
  out.rss = res.squaredNorm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& sv = svd.singularValues();
  out.cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (out.rss / static_cast<double>(rows - cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    out.beta.push_back(beta(j));
    out.stderr_.push_back(std::sqrt(std::max(0.0, cov(j, j))));
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) v.back() = b;
  return v;
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> v(n);
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : std::exp(la + (lb - la) * i / (n - 1));
  if (n > 1) {
    v.front() = a;
    v.back() = b;
  }
  return v;
}

}  // namespace pmelab
