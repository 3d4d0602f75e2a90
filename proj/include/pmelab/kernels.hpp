#pragma once

#include <cstddef>

#include "pmelab/solver.hpp"

namespace pmelab::kernels {

// out_i = a+_i (v_{i+1} - v_i) - a-_i (v_i - v_{i-1}), v = u^m, for i < end. u[N] is the wall value 0.
void flux_rhs_serial(const Grid& g, double m, const double* u, double* out, std::size_t end);
void flux_rhs_parallel(const Grid& g, double m, const double* u, double* out, std::size_t end);

// 1 / max_i (a+_i + a-_i) m max(u_{i-1}, u_i, u_{i+1})^{m-1}; infinity for u = 0.
double euler_dt_serial(const Grid& g, double m, const double* u, std::size_t end);
double euler_dt_parallel(const Grid& g, double m, const double* u, std::size_t end);

// Forward Euler step of length dt on [0, end).
void euler_step_serial(const Grid& g, double m, double dt, const double* u, double* out, std::size_t end);
void euler_step_parallel(const Grid& g, double m, double dt, const double* u, double* out, std::size_t end);

// One RKL2 stage: out = mu ym1 + nu ym2 + (1 - mu - nu) y0 + tau (mu_t L(ym1) + gamma_t L0).
struct StageCoefficients {
  double mu, nu, mu_t, gamma_t, tau;
};
void rkl2_stage_serial(const Grid& g, double m, const StageCoefficients& c, const double* y0, const double* ym1,
                       const double* ym2, const double* L0, double* out, std::size_t end);
void rkl2_stage_parallel(const Grid& g, double m, const StageCoefficients& c, const double* y0,
                         const double* ym1, const double* ym2, const double* L0, double* out, std::size_t end);

}  // namespace pmelab::kernels
