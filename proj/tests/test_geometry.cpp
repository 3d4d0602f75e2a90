#include <doctest.h>

#include <cmath>

#include "pmelab/errors.hpp"
#include "pmelab/geometry.hpp"
#include "pmelab/numerics.hpp"

using namespace pmelab;

TEST_CASE("euclidean and hyperbolic closed forms") {
  auto eu = make_closed_form(ModelKind::euclidean, {}, 3);
  auto c = curvatures(eu, 2.0);
  CHECK(c.K_radial == doctest::Approx(0));
  CHECK(c.H_orthogonal == doctest::Approx(0));
  CHECK(c.Ric_radial == doctest::Approx(0));
  CHECK(c.drift == doctest::Approx(1));

  auto sh = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3);
  auto h = curvatures(sh, 1.0);
  CHECK(h.K_radial == doctest::Approx(-1).epsilon(1e-12));
  CHECK(h.H_orthogonal == doctest::Approx(-1).epsilon(1e-12));
  CHECK(h.Ric_radial == doctest::Approx(-2).epsilon(1e-12));
  for (double r : {0.3, 2.0, 40.0}) CHECK(curvatures(sh, r).K_radial == doctest::Approx(-1).epsilon(1e-10));
}

TEST_CASE("volumes") {
  auto eu = make_closed_form(ModelKind::euclidean, {}, 3);
  auto sh = make_closed_form(ModelKind::hyperbolic_sinh, {}, 3);
  CHECK(volume(eu, 1.0) == doctest::Approx(4 * pi / 3).epsilon(1e-12));
  CHECK(volume(sh, 1.0) == doctest::Approx(pi * (std::sinh(2.0) - 2)).epsilon(1e-12));
  CHECK(volume(sh, 0.0) == 0.0);
}

TEST_CASE("class A membership near the origin") {
  std::vector<ModelFunction> ms{
      make_closed_form(ModelKind::euclidean, {}, 3),
      make_closed_form(ModelKind::hyperbolic_sinh, {}, 3),
      make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 2}, {"A", 0.5}}, 3),
      make_closed_form(ModelKind::type_II, {{"a1", 1}, {"alpha", 2}}, 3),
      make_closed_form(ModelKind::type_IV, {{"A", 2}, {"c", 1}, {"alpha", 2}}, 3),
      solve_psi_from_curvature(CurvatureProfile::upper(1, 0, 1), 50),
      solve_psi_from_curvature(CurvatureProfile::lower(1, 0.5, 1, 2), 50),
  };
  for (const auto& m : ms)
    for (double h : {1e-4, 1e-5}) CHECK(std::fabs(m.psi(h) / h - 1) < 1e-3);
}

TEST_CASE("piecewise closed forms are C1 at the matching radius") {
  std::vector<ModelFunction> ms{
      make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 2}, {"A", 0.5}}, 3),
      make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 1}, {"A", 0.5}}, 3),
      make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 0.5}, {"A", 0.1}}, 3),
      make_closed_form(ModelKind::type_II, {{"a1", 1}, {"alpha", 2}}, 3),
      make_closed_form(ModelKind::type_IV, {{"A", 2}, {"c", 1}, {"alpha", 2}}, 3),
  };
  for (const auto& m : ms) {
    const double rb = m.r_bar();
    REQUIRE(rb > 0);
    const double lo = rb * (1 - 1e-13), hi = rb * (1 + 1e-13);
    CHECK(std::fabs(m.psi(hi) / m.psi(lo) - 1) < 1e-10);
    CHECK(std::fabs(m.dpsi(hi) / m.dpsi(lo) - 1) < 1e-10);
  }
}

TEST_CASE("asymptotic curvature laws at 10 r_bar") {
  auto t1 = make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 2}, {"A", 0.5}}, 3);
  const double r = 10 * t1.r_bar();
  CHECK(std::fabs(curvatures(t1, r).K_radial / (-4 * r * r) - 1) < 0.05);
  auto t2 = make_closed_form(ModelKind::type_II, {{"a1", 1}, {"alpha", 2}}, 3);
  const double r2 = 10 * t2.r_bar();
  CHECK(std::fabs(curvatures(t2, r2).K_radial / (-2 / (r2 * r2)) - 1) < 0.05);
}

TEST_CASE("parameter constraints are named") {
  CHECK_THROWS_AS(make_closed_form(ModelKind::type_I, {{"a1", 1}, {"alpha", 0.5}, {"A", 10}}, 3), ConstraintError);
  CHECK_THROWS_AS(make_closed_form(ModelKind::type_IV, {{"A", 0.5}, {"c", 1}, {"alpha", 2}}, 3), ConstraintError);
  CHECK_THROWS_AS(CurvatureProfile::upper(-1, 0, 1), ConstraintError);
  CHECK_THROWS_AS(CurvatureProfile::lower(1, 0, 1, 0), ConstraintError);
}

TEST_CASE("comparison profiles: zero source and pointwise bounds") {
  auto up = CurvatureProfile::upper(1, 0.5, 1);
  auto m = solve_psi_from_curvature(up, 20);
  for (double r : {0.1, 0.5, 0.99}) CHECK(m.psi(r) == doctest::Approx(r).epsilon(1e-10));
  auto lo = CurvatureProfile::lower(1, 0.5, 1, 1);
  auto neg = CurvatureProfile::lower(1, -0.5, 1, 2);
  for (double r : linspace(1e-3, 50, 10000)) {
    CHECK(up.w(r) <= (r > 1 ? std::pow(r, 1.0) : 0.0) + 1e-14);
    CHECK(lo.w(r) >= (r > 1 ? std::pow(r, 1.0) : 1.0) - 1e-14);
    if (r > 2) CHECK(neg.w(r) == doctest::Approx(std::pow(r, -1.0)));
  }
  // psi' >= 1 on the upper branch
  for (double r : linspace(0.01, 20, 400)) CHECK(m.dpsi(r) >= 1 - 1e-12);
}

TEST_CASE("Riccati diagnostic") {
  for (auto [Q, mu] : std::vector<std::pair<double, double>>{{1, 0}, {1, 0.5}, {2, -0.5}, {4, 0.5}}) {
    auto m = solve_psi_from_curvature(CurvatureProfile::upper(Q, mu, 1), 200);
    auto rep = riccati_diagnostic(m, Q, mu, 200);
    CHECK(rep.deviation < 0.02);
    for (double r : linspace(2, 200, 300)) CHECK(riccati_diagnostic(m, Q, mu, r).within_sandwich);
  }
  auto flat = make_closed_form(ModelKind::euclidean, {}, 3);
  CHECK_FALSE(riccati_diagnostic(flat, 1, 0, 10).applicable);
}

TEST_CASE("mu < -1 curvature gives linear growth") {
  auto m = solve_psi_from_curvature(CurvatureProfile::upper(1, -1.5, 1), 400);
  const double c = m.psi(400) / 400;
  CHECK(c > 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {50.0, 100.0, 200.0, 400.0}) {
    const double probe = std::fabs(m.psi(r) - c * r) / r;
    CHECK(probe < prev);
    prev = probe;
  }
}

TEST_CASE("ODE-defined psi'' is w psi") {
  auto p = CurvatureProfile::upper(2, 0, 1);
  auto m = solve_psi_from_curvature(p, 30);
  for (double r : {0.5, 1.5, 3.0, 25.0}) CHECK(m.ddpsi(r) / m.psi(r) == doctest::Approx(p.w(r)).epsilon(1e-12));
}
