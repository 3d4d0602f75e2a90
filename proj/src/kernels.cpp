#include "pmelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmelab::kernels {

namespace {

inline double pw(double u, double m) { return m == 2.0 ? u * u : (u > 0 ? std::pow(u, m) : 0.0); }
inline double pw1(double u, double m) { return m == 2.0 ? u : (u > 0 ? std::pow(u, m - 1) : 0.0); }

inline double rhs_at(const Grid& g, double m, const double* u, std::size_t i) {
  const double vi = pw(u[i], m);
  const double up = g.a_plus[i] * (pw(u[i + 1], m) - vi);
  const double dn = i > 0 ? g.a_minus[i] * (vi - pw(u[i - 1], m)) : 0.0;
  return up - dn;
}

inline double rate_at(const Grid& g, double m, const double* u, std::size_t i) {
  double top = std::max(u[i], u[i + 1]);
  if (i > 0) top = std::max(top, u[i - 1]);
  return (g.a_plus[i] + g.a_minus[i]) * m * pw1(top, m);
}

}  // namespace

void flux_rhs_serial(const Grid& g, double m, const double* u, double* out, std::size_t end) {
  for (std::size_t i = 0; i < end; ++i) out[i] = rhs_at(g, m, u, i);
}

void flux_rhs_parallel(const Grid& g, double m, const double* u, double* out, std::size_t end) {
  const long n = static_cast<long>(end);
#pragma omp parallel for schedule(static) if (n > 512)
  for (long i = 0; i < n; ++i) out[i] = rhs_at(g, m, u, static_cast<std::size_t>(i));
}

double euler_dt_serial(const Grid& g, double m, const double* u, std::size_t end) {
  double rate = 0.0;
  for (std::size_t i = 0; i < end; ++i) rate = std::max(rate, rate_at(g, m, u, i));
  return rate > 0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

double euler_dt_parallel(const Grid& g, double m, const double* u, std::size_t end) {
  const long n = static_cast<long>(end);
  double rate = 0.0;
#pragma omp parallel for schedule(static) reduction(max : rate) if (n > 512)
  for (long i = 0; i < n; ++i) rate = std::max(rate, rate_at(g, m, u, static_cast<std::size_t>(i)));
  return rate > 0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

void euler_step_serial(const Grid& g, double m, double dt, const double* u, double* out, std::size_t end) {
  for (std::size_t i = 0; i < end; ++i) out[i] = u[i] + dt * rhs_at(g, m, u, i);
}

void euler_step_parallel(const Grid& g, double m, double dt, const double* u, double* out, std::size_t end) {
  const long n = static_cast<long>(end);
#pragma omp parallel for schedule(static) if (n > 512)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = u[k] + dt * rhs_at(g, m, u, k);
  }
}

void rkl2_stage_serial(const Grid& g, double m, const StageCoefficients& c, const double* y0, const double* ym1,
                       const double* ym2, const double* L0, double* out, std::size_t end) {
  const double w0 = 1 - c.mu - c.nu;
  for (std::size_t i = 0; i < end; ++i)
    out[i] = c.mu * ym1[i] + c.nu * ym2[i] + w0 * y0[i] + c.tau * (c.mu_t * rhs_at(g, m, ym1, i) + c.gamma_t * L0[i]);
}

void rkl2_stage_parallel(const Grid& g, double m, const StageCoefficients& c, const double* y0,
                         const double* ym1, const double* ym2, const double* L0, double* out, std::size_t end) {
  const double w0 = 1 - c.mu - c.nu;
  const long n = static_cast<long>(end);
#pragma omp parallel for schedule(static) if (n > 512)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = c.mu * ym1[k] + c.nu * ym2[k] + w0 * y0[k] +
             c.tau * (c.mu_t * rhs_at(g, m, ym1, k) + c.gamma_t * L0[k]);
  }
}

}  // namespace pmelab::kernels
