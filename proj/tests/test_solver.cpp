#include <doctest.h>

#include <cmath>
#include <random>

#include "pmelab/barriers.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/config.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/numerics.hpp"
#include "pmelab/pipeline.hpp"
#include "pmelab/solver.hpp"

using namespace pmelab;

namespace {

std::shared_ptr<const Grid> grid_for(const ModelFunction& psi, double R_max, int N, Grading gr = Grading::uniform) {
  return std::make_shared<Grid>(make_grid(R_max, N, gr, manifold_measure(psi)));
}

const ModelFunction& flat() {
  static const auto m = make_closed_form(ModelKind::euclidean, {}, 3, 100);
  return m;
}

RadialField from_spec(std::shared_ptr<const Grid> g, const BarrierSpec& s, double t) {
  RadialField f;
  f.grid = g;
  f.u.resize(g->nodes());
  for (std::size_t i = 0; i < g->nodes(); ++i) f.u[i] = i + 1 < g->nodes() ? evaluate(s, g->r[i], t) : 0.0;
  return f;
}

double l1_distance(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i + 1 < g.nodes(); ++i) acc += std::fabs(a[i] - b[i]) * g.cell_mass_weight(i);
  return acc;
}

}  // namespace

TEST_CASE("uniform grid spacing and flat shell volumes") {
  auto g = grid_for(flat(), 10, 1000);
  CHECK(g->nodes() == 1001);
  CHECK(g->r[1] - g->r[0] == doctest::Approx(0.01));
  CHECK(g->min_spacing() == doctest::Approx(0.01));
  for (std::size_t i : {1u, 17u, 500u, 999u}) {
    const double a = 0.5 * (g->r[i - 1] + g->r[i]), b = 0.5 * (g->r[i] + g->r[i + 1]);
    CHECK(g->cell_mass_weight(i) == doctest::Approx(4 * pi / 3 * (b * b * b - a * a * a)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_grid(10, 50, Grading::uniform, manifold_measure(flat())), ConstraintError);
}

TEST_CASE("graded grid is increasing with a uniform band") {
  auto sh = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3, 100);
  auto g = grid_for(sh, 60, 2000, Grading::graded);
  for (std::size_t i = 1; i < g->nodes(); ++i) {
    CHECK(g->r[i] > g->r[i - 1]);
    CHECK(g->cell_mass_weight(i - 1) > 0);
  }
  CHECK(g->R_max() == 60);
  CHECK(g->r[1] == doctest::Approx(30.0 / 1600));
}

TEST_CASE("box datum diagnostics") {
  auto g = grid_for(flat(), 4, 4000);
  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  auto d = diagnostics(u0);
  CHECK(d.sup_norm == 1);
  CHECK(d.support_radius == doctest::Approx(1));
  // node-centred cells: the last cell reaches half a spacing past 1
  const double h = 1e-3, b = 1 + h / 2;
  CHECK(d.mass == doctest::Approx(4 * pi / 3 * b * b * b).epsilon(1e-12));
  CHECK(d.volume == doctest::Approx(4 * pi / 3).epsilon(1e-12));
  CHECK_THROWS_AS(make_datum(g, DatumShape::box, 5, 1), ConstraintError);
}

TEST_CASE("support threshold at zero is exact on a zero tail") {
  auto g = grid_for(flat(), 4, 400);
  auto u0 = make_datum(g, DatumShape::bump, 2, 1);
  double minpos = 1;
  for (double v : u0.u)
    if (v > 0) minpos = std::min(minpos, v);
  const auto a = diagnostics(u0, 0.0), b = diagnostics(u0, 0.5 * minpos);
  CHECK(a.support_radius == b.support_radius);
  CHECK(a.mass == b.mass);
}

TEST_CASE("barrier field support within one cell") {
  auto up = barenblatt_qe(3, 2, -2, 0, DatumStats{1, 1, 0, 0}, true);
  auto g = grid_for(flat(), 1.1 * support_radius(up, 100), 2000);
  for (double t : {0.0, 5.0, 100.0}) {
    auto f = from_spec(g, up, t);
    CHECK(std::fabs(diagnostics(f, 0.0).support_radius - support_radius(up, t)) <= g->min_spacing());
  }
}

TEST_CASE("zero datum stays zero") {
  auto g = grid_for(flat(), 4, 200);
  RadialField z{g, std::vector<double>(g->nodes(), 0.0), 0.0};
  auto tr = evolve(z, 2, geometric_schedule(1e-2, 10, 5));
  for (const auto& s : tr.samples) {
    CHECK(s.diag.sup_norm == 0);
    for (double v : s.u) CHECK(v == 0);
  }
}

TEST_CASE("flat run: mass, finite propagation, decay") {
  auto g = grid_for(flat(), 8, 800);
  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  auto tr = evolve(u0, 2, geometric_schedule(1e-2, 300, 30));
  CHECK_FALSE(tr.domain_exhausted);
  double prevR = 0;
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    CHECK(std::fabs(s.diag.mass / tr.initial_mass - 1) < 1e-3);
    CHECK(s.diag.support_radius < g->R_max());
    CHECK(s.diag.support_radius >= prevR - 1e-12);
    prevR = s.diag.support_radius;
    for (double v : s.u) CHECK(v >= 0);
  }
  CHECK(tr.samples.back().diag.sup_norm < tr.samples.front().diag.sup_norm);
}

TEST_CASE("comparison principle and L1 contraction") {
  auto g = grid_for(flat(), 12, 1200);
  auto a = make_datum(g, DatumShape::bump, 1, 0.5);
  auto b = make_datum(g, DatumShape::box, 1.5, 1.0);
  const auto ts = geometric_schedule(1e-2, 50, 20);
  auto ta = evolve(a, 2, ts), tb = evolve(b, 2, ts);
  REQUIRE_FALSE(tb.domain_exhausted);
  REQUIRE(tb.samples.size() == ts.size());
  double prev = l1_distance(*g, a.u, b.u);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto& ua = ta.samples[k].u;
    const auto& ub = tb.samples[k].u;
    for (std::size_t i = 1; i + 1 < g->nodes(); ++i) {
      const double delta = 2 * std::max(std::fabs(ub[i + 1] - ub[i]), std::fabs(ub[i] - ub[i - 1]));
      CHECK(ua[i] <= ub[i] + delta);
    }
    const double d = l1_distance(*g, ua, ub);
    CHECK(d <= prev * 1.005);
    prev = d;
  }
}

TEST_CASE("grid convergence on the flat Barenblatt solution") {
  auto bb = barenblatt_qe(3, 2, -2, 0, DatumStats{1, 1, 0, 0}, true);
  const double T = 20;
  // the initial free boundary sits on a node at every resolution
  const double R_max = 4 * support_radius(bb, 0);
  REQUIRE(support_radius(bb, T) < R_max);
  std::vector<double> sup;
  for (int N : {200, 400, 800, 1600}) {
    auto g = grid_for(flat(), R_max, N);
    auto tr = evolve(from_spec(g, bb, 0), 2, {T});
    sup.push_back(tr.samples.back().diag.sup_norm);
  }
  const double o1 = std::log2(std::fabs((sup[0] - sup[1]) / (sup[1] - sup[2])));
  const double o2 = std::log2(std::fabs((sup[1] - sup[2]) / (sup[2] - sup[3])));
  MESSAGE("observed orders " << o1 << " " << o2);
  CHECK(o1 >= 1.5);
  CHECK(o2 >= 1.5);
  CHECK(std::fabs(sup[3] / evaluate(bb, 0, T) - 1) < 1e-5);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  auto sh = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3, 100);
  auto g = grid_for(sh, 30, 5000, Grading::graded);
  const std::size_t n = g->nodes();
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<double> u(n), y1(n), y2(n), L0(n);
  for (std::size_t i = 0; i + 1 < n; ++i) u[i] = U(gen), y1[i] = U(gen), y2[i] = U(gen), L0[i] = U(gen) - 0.5;
  u[n - 1] = y1[n - 1] = y2[n - 1] = 0;
  std::vector<double> a(n), b(n);
  kernels::flux_rhs_serial(*g, 2, u.data(), a.data(), n - 1);
  kernels::flux_rhs_parallel(*g, 2, u.data(), b.data(), n - 1);
  CHECK(a == b);
  CHECK(kernels::euler_dt_serial(*g, 2.5, u.data(), n - 1) == kernels::euler_dt_parallel(*g, 2.5, u.data(), n - 1));
  kernels::euler_step_serial(*g, 2, 1e-9, u.data(), a.data(), n - 1);
  kernels::euler_step_parallel(*g, 2, 1e-9, u.data(), b.data(), n - 1);
  CHECK(a == b);
  const kernels::StageCoefficients c{1.2, -0.3, 0.7, -0.2, 1e-8};
  kernels::rkl2_stage_serial(*g, 2, c, u.data(), y1.data(), y2.data(), L0.data(), a.data(), n - 1);
  kernels::rkl2_stage_parallel(*g, 2, c, u.data(), y1.data(), y2.data(), L0.data(), b.data(), n - 1);
  CHECK(a == b);

  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  SolverOptions ser;
  ser.parallel = false;
  const auto ts = geometric_schedule(1e-2, 10, 6);
  auto ts_par = evolve(u0, 2, ts), ts_ser = evolve(u0, 2, ts, ser);
  for (std::size_t k = 0; k < ts.size(); ++k) CHECK(ts_par.samples[k].u == ts_ser.samples[k].u);
}

TEST_CASE("super-time-stepping agrees with forward Euler") {
  auto g = grid_for(flat(), 5, 400);
  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  SolverOptions fe;
  fe.integrator = Integrator::euler;
  const auto ts = geometric_schedule(1e-2, 5, 6);
  auto a = evolve(u0, 2, ts), b = evolve(u0, 2, ts, fe);
  CHECK(a.steps < b.steps);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double s = b.samples[k].diag.sup_norm;
    CHECK(std::fabs(a.samples[k].diag.sup_norm / s - 1) < 0.01);
    CHECK(std::fabs(a.samples[k].diag.support_radius - b.samples[k].diag.support_radius) <= 2 * g->min_spacing());
  }
}

TEST_CASE("sandwich checks") {
  auto sh = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3, 100);
  auto up = upper_qh_subcritical(3, 2, 0, 1, 1, sh, datum_stats(DatumShape::box, 1, 1));
  auto g = grid_for(sh, 1.1 * support_radius(up, 100), 2000);
  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  auto tr = evolve(u0, 2, geometric_schedule(1e-2, 100, 25));
  auto ok = sandwich_check(tr, nullptr, up, std::numeric_limits<double>::infinity());
  CHECK(ok.pass());
  CHECK(ok.lower_vacuous);
  CHECK(ok.checked > 0);

  // t0 below its floor
  auto bad = up;
  bad.log_t0 = 0.1 * up.log_t0;
  auto rep = sandwich_check(tr, nullptr, bad, 0);
  CHECK(rep.upper_violations > 0);
  CHECK(rep.worst_upper_t < 1.0);

  SolverOptions nf;
  nf.store_fields = false;
  auto bare = evolve(u0, 2, {1.0}, nf);
  CHECK_THROWS_AS(sandwich_check(bare, nullptr, up, 0), ConstraintError);
}

TEST_CASE("trivial datum: no waiting time") {
  auto g = grid_for(flat(), 4, 200);
  RadialField z{g, std::vector<double>(g->nodes(), 0.0), 0.0};
  auto tr = evolve(z, 2, geometric_schedule(1e-2, 10, 5));
  CHECK_FALSE(waiting_time(tr, 1, 1e-10).found);
}

TEST_CASE("domain exhaustion is reported") {
  auto g = grid_for(flat(), 1.5, 200);
  auto u0 = make_datum(g, DatumShape::box, 1, 1);
  auto tr = evolve(u0, 2, geometric_schedule(1e-2, 100, 10));
  CHECK(tr.domain_exhausted);
  CHECK(tr.exhausted_at > 0);
}

TEST_CASE("weighted measure: constant weight is the flat problem") {
  auto flat_g = grid_for(flat(), 5, 500);
  auto w = WeightProfile::constant(3, 1.0, 100);
  auto wg = std::make_shared<Grid>(make_grid(5, 500, Grading::uniform, weighted_measure(w, 3)));
  const auto ts = geometric_schedule(1e-2, 5, 5);
  auto a = evolve(make_datum(flat_g, DatumShape::box, 1, 1), 2, ts);
  auto b = evolve(make_datum(wg, DatumShape::box, 1, 1), 2, ts);
  for (std::size_t k = 0; k < ts.size(); ++k)
    CHECK(b.samples[k].diag.sup_norm == doctest::Approx(a.samples[k].diag.sup_norm).epsilon(1e-10));
}

TEST_CASE("lower barrier is chosen once the solution covers the required ball") {
  auto c = parse_config(R"([geometry]
kind = type_I
n = 3
a1 = 1
alpha = 1
A = 0.5
[pde]
sup = 0.3
[run]
T = 10
N = 1000
R_max = 12
)");
  const auto psi = build_geometry(c.geometry);
  const auto cmp = comparison_profiles(psi);
  const auto grid = std::make_shared<Grid>(make_grid(c.run.R_max, c.run.N, Grading::uniform, manifold_measure(psi)));
  const auto traj = evolve(make_datum(grid, DatumShape::box, 1, 0.3), 2, geometric_schedule(1e-2, 10, 31));
  const auto ch = choose_lower(traj, RegimeKind::qh_subcritical, psi, cmp, 2, 3e-11);
  REQUIRE(ch.found);
  const auto wt = waiting_time(traj, ch.R_required, 3e-11);
  REQUIRE(wt.found);
  CHECK(ch.sample >= wt.sample);
  CHECK(ch.spec.time_origin == traj.samples[ch.sample].t);
  CHECK(std::isfinite(ch.spec.log_t0));
  // no later sample gives a smaller t0
  for (std::size_t k = wt.sample; k < traj.samples.size(); ++k) {
    double inf = 1e300;
    for (std::size_t i = 0; i < grid->nodes() && grid->r[i] <= ch.R_required; ++i)
      inf = std::min(inf, traj.samples[k].u[i]);
    if (!(inf > 0)) continue;
    const auto s = build_lower(RegimeKind::qh_subcritical, psi, cmp, 2, DatumStats{0, 0, inf, ch.R_required});
    CHECK(s.log_t0 >= ch.spec.log_t0 * (1 - 1e-12));
  }
}
