#include "../oracles.hpp"
#include "helpers.hpp"

#include "compsolve/elliptic.hpp"
#include "compsolve/errors.hpp"

#include <doctest.h>

#include <numbers>

using namespace compsolve;

namespace {

EllipticCoefficient phi_only(ScalarFunction phi, double scale = 1.0)
{
  return [phi, scale](int, const Point&, double, const std::array<double, 2>& eta) { return scale * phi(eta[0]); };
}

EllipticCoefficients envelope(ScalarFunction phi, double b, double c)
{
  EllipticCoefficients coeffs;
  coeffs.phi = std::move(phi);
  coeffs.b = EllipticCoefficients::constant(b);
  coeffs.c = EllipticCoefficients::constant(c);
  return coeffs;
}

double sine_bump(const Point& x, int dim)
{
  double v = std::sin(std::numbers::pi * x[0]);
  if (dim == 2)
    v *= std::sin(std::numbers::pi * x[1]);
  return v;
}

} // namespace

TEST_CASE("constant coefficient gives the scaled tridiagonal Laplacian")
{
  const Grid grid(1, 3);
  const auto one = ScalarFunction::constant_value(1.0);
  const auto d = build_elliptic_operator(grid, envelope(one, 1.0, 1.0), phi_only(one));
  Mat expected(3, 3);
  expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  expected *= 16.0; // 1 / h^2
  Mat j(3, 3);
  for (int k = 0; k < 3; ++k)
    j.col(k) = d.f(Vec::Unit(3, k));
  CHECK((j - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("discrete Laplacian of a sine is second-order consistent")
{
  const auto one = ScalarFunction::constant_value(1.0);
  double previous = 0.0;
  for (int n : {15, 31, 63}) {
    const Grid grid(1, n);
    const auto d = build_elliptic_operator(grid, envelope(one, 1.0, 1.0), phi_only(one));
    const Vec u = sample_on_grid(grid, [](const Point& x) { return std::sin(std::numbers::pi * x[0]); });
    const double err = (d.f(u) - std::numbers::pi * std::numbers::pi * u).lpNorm<Eigen::Infinity>();
    if (previous > 0.0)
      CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}

TEST_CASE("integration by parts identity")
{
  const Grid grid(2, 6);
  const auto phi = ScalarFunction::saturating(1.0);
  const auto d = build_elliptic_operator(grid, envelope(phi, 2.0, 1.0), phi_only(phi));
  const auto& X = d.f.domain();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Vec u = testing::gaussian(X.dim(), rng, 0.05);
    const Vec v = testing::gaussian(X.dim(), rng);
    const Vec g = grid.gradient() * u;
    const Vec gv = grid.gradient() * v;
    double expected = 0.0;
    for (int e = 0; e < grid.edge_count(); ++e)
      expected += phi(g[e]) * g[e] * gv[e];
    expected *= grid.cell_volume();
    CHECK(X.pair(d.f(u), v) == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("surrogate lies between the envelope operators")
{
  const Grid grid(1, 9);
  const auto phi = ScalarFunction::saturating(1.0);
  const auto d = build_elliptic_operator(grid, envelope(phi, 1.5, 0.5), phi_only(phi));
  const auto blend = std::dynamic_pointer_cast<const MonotoneBlendSurrogate>(d.f0);
  REQUIRE(blend);
  const auto& X = d.f.domain();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec u = testing::gaussian(X.dim(), rng, 0.1);
    const double hi = X.pair(blend->upper()(u), u);
    const double lo = X.pair(blend->lower()(u), u);
    const double mid = X.pair(d.eval_f0(u), u);
    REQUIRE(lo <= mid * (1.0 + 1e-12));
    REQUIRE(mid <= hi * (1.0 + 1e-12));
    REQUIRE(lo <= X.pair(d.f(u), u) * (1.0 + 1e-12));
    REQUIRE(X.pair(d.f(u), u) <= hi * (1.0 + 1e-12));
  }
}

TEST_CASE("zero forcing gives the zero solution")
{
  const Grid grid(1, 17);
  const auto phi = ScalarFunction::saturating(1.0);
  const auto d = build_elliptic_operator(grid, envelope(phi, 1.2, 0.8), phi_only(phi));
  const auto trace = solve_elliptic(d, Vec::Zero(17), {});
  CHECK(trace.converged());
  CHECK(trace.x.norm() == 0.0);
}

TEST_CASE("manufactured solutions are recovered")
{
  for (int dim : {1, 2}) {
    const Grid grid(dim, dim == 1 ? 33 : 11);
    const auto phi = ScalarFunction::saturating(1.0);
    const auto d = build_elliptic_operator(grid, envelope(phi, 2.0, 1.0), phi_only(phi));
    const Vec exact = sample_on_grid(grid, [dim](const Point& x) { return sine_bump(x, dim); });
    const auto trace = solve_elliptic(d, d.f(exact), {});
    REQUIRE(trace.converged());
    CHECK((trace.x - exact).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("xi-modulated coefficient against damped Newton")
{
  const Grid grid(1, 33);
  const auto phi = ScalarFunction::saturating(1.0);
  EllipticCoefficient a = [phi](int, const Point&, double xi, const std::array<double, 2>& eta) {
    return (1.0 + 0.2 * std::sin(xi)) * phi(eta[0]);
  };
  const auto d = build_elliptic_operator(grid, envelope(phi, 1.2, 0.8), a);
  const Vec rhs = sample_on_grid(grid, [](const Point& x) { return std::numbers::pi * std::numbers::pi * sine_bump(x, 1); });

  const auto est = estimate_contraction(d, [] {
    SamplerConfig s;
    s.n_pairs = 256;
    return s;
  }());
  REQUIRE(est.contractive());
  CHECK(est.contraction->sigma < 1.0);

  const auto trace = solve_elliptic(d, rhs, {});
  REQUIRE(trace.converged());
  const Vec newton = oracle::damped_newton([&](const Vec& u) -> Vec { return d.f.eval_unchecked(u) - rhs; },
                                           Vec::Zero(33), 1e-9);
  CHECK((trace.x - newton).lpNorm<Eigen::Infinity>() <= 1e-6 * newton.lpNorm<Eigen::Infinity>());
}

TEST_CASE("coefficient outside its envelope is rejected")
{
  const Grid grid(1, 9);
  const auto phi = ScalarFunction::constant_value(1.0);
  CHECK_THROWS_AS(build_elliptic_operator(grid, envelope(phi, 1.5, 1.0), phi_only(phi, 2.0)),
                  CoefficientEnvelopeViolated);
  CHECK_THROWS_AS(build_elliptic_operator(grid, envelope(phi, 0.5, 1.0), phi_only(phi)), ConfigError);
}
