#include <doctest.h>

#include <cmath>

#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"
#include "pmelab/ode.hpp"

using namespace pmelab;

TEST_CASE("sphere areas from the Gamma formula") {
  CHECK(sphere_area(2) == doctest::Approx(2 * pi).epsilon(1e-14));
  CHECK(sphere_area(3) == doctest::Approx(4 * pi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2 * pi * pi).epsilon(1e-14));
  CHECK(sphere_area(5) == doctest::Approx(8 * pi * pi / 3).epsilon(1e-14));
}

TEST_CASE("log_add_exp") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_add_exp(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(log_add_exp(ninf, 1.5) == 1.5);
  CHECK(log_add_exp(800.0, 800.0) == doctest::Approx(800 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0, pi).value == doctest::Approx(2).epsilon(1e-12));
  // sharply peaked integrand
  auto q = integrate([](double x) { return std::exp(-1e4 * (x - 0.3) * (x - 0.3)); }, 0, 1);
  CHECK(q.value == doctest::Approx(std::sqrt(pi / 1e4)).epsilon(1e-10));
}

TEST_CASE("root finding") {
  auto f = [](double x) { return x * x - 2; };
  auto df = [](double x) { return 2 * x; };
  CHECK(find_root(f, df, 1, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // bracket widened geometrically
  CHECK(find_root(f, df, 0.01, 0.1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1; }, df, 1, 2), NumericalError);
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> one(20, 1.0), x(20), y(20);
  for (int i = 0; i < 20; ++i) x[i] = i, y[i] = 3 - 0.5 * i;
  auto r = least_squares({one, x}, y);
  CHECK(r.beta[0] == doctest::Approx(3).epsilon(1e-13));
  CHECK(r.beta[1] == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(r.rss < 1e-24);
  CHECK(r.stderr_[1] < 1e-12);
  CHECK(r.cond > 1);
}

TEST_CASE("grids") {
  auto l = linspace(0, 1, 11);
  CHECK(l.size() == 11);
  CHECK(l[5] == doctest::Approx(0.5));
  auto g = geomspace(1e-2, 1e4, 7);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e4));
  CHECK(g[3] == doctest::Approx(10).epsilon(1e-12));
}

TEST_CASE("linear ODE: psi'' = psi gives sinh far beyond the double range") {
  auto sol = integrate_linear_second_order([](double) { return 1.0; }, 1e-8, 1e-8, 1.0, 900.0, {});
  CHECK(sol.evaluate(1.0).log_psi == doctest::Approx(std::log(std::sinh(1.0))).epsilon(1e-9));
  // log sinh r = r - log 2 for large r
  CHECK(sol.evaluate(900.0).log_psi == doctest::Approx(900 - std::log(2.0)).epsilon(1e-10));
  CHECK(sol.evaluate(2.5).g == doctest::Approx(1 / std::tanh(2.5)).epsilon(1e-9));
}

TEST_CASE("linear ODE lands on breakpoints and keeps psi = r where w = 0") {
  auto w = [](double r) { return r < 1 ? 0.0 : (r - 1); };
  auto sol = integrate_linear_second_order(w, 1e-8, 1e-8, 1.0, 5.0, {1.0});
  bool hit = false;
  for (const auto& nd : sol.nodes()) hit = hit || nd.r == 1.0;
  CHECK(hit);
  CHECK(std::exp(sol.evaluate(0.7).log_psi) == doctest::Approx(0.7).epsilon(1e-12));
}
