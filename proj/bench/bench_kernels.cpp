// Serial reference against OpenMP kernels on a graded hyperbolic grid.
#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "pmelab/geometry.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/solver.hpp"

using namespace pmelab;

namespace {

struct Fixture {
  std::shared_ptr<Grid> g;
  std::vector<double> u, y1, y2, L0, out;
  explicit Fixture(int N) {
    auto psi = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3, 100);
    g = std::make_shared<Grid>(make_grid(40, N, Grading::graded, manifold_measure(psi)));
    const std::size_t n = g->nodes();
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> U(0, 1);
    u.resize(n), y1.resize(n), y2.resize(n), L0.resize(n), out.resize(n);
    for (std::size_t i = 0; i + 1 < n; ++i) u[i] = U(gen), y1[i] = U(gen), y2[i] = U(gen), L0[i] = U(gen);
  }
  std::size_t end() const { return g->nodes() - 1; }
};

template <bool Parallel>
void BM_flux_rhs(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::flux_rhs_parallel(*f.g, 2, f.u.data(), f.out.data(), f.end());
    else
      kernels::flux_rhs_serial(*f.g, 2, f.u.data(), f.out.data(), f.end());
    benchmark::DoNotOptimize(f.out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_euler_step(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::euler_step_parallel(*f.g, 2, 1e-9, f.u.data(), f.out.data(), f.end());
    else
      kernels::euler_step_serial(*f.g, 2, 1e-9, f.u.data(), f.out.data(), f.end());
    benchmark::DoNotOptimize(f.out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_rkl2_stage(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  const kernels::StageCoefficients c{1.2, -0.3, 0.7, -0.2, 1e-8};
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::rkl2_stage_parallel(*f.g, 2, c, f.u.data(), f.y1.data(), f.y2.data(), f.L0.data(), f.out.data(), f.end());
    else
      kernels::rkl2_stage_serial(*f.g, 2, c, f.u.data(), f.y1.data(), f.y2.data(), f.L0.data(), f.out.data(), f.end());
    benchmark::DoNotOptimize(f.out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_flux_rhs<false>)->Arg(4000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_flux_rhs<true>)->Arg(4000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_euler_step<false>)->Arg(4000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_euler_step<true>)->Arg(4000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_rkl2_stage<false>)->Arg(4000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_rkl2_stage<true>)->Arg(4000)->Arg(20000)->Arg(200000);

BENCHMARK_MAIN();
