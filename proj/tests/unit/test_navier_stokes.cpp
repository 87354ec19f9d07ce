#include "../oracles.hpp"
#include "helpers.hpp"

#include "compsolve/errors.hpp"
#include "compsolve/navier_stokes.hpp"

#include <doctest.h>

using namespace compsolve;

namespace {

NSConfig rational_config(int modes = 4)
{
  NSConfig cfg;
  cfg.nu = 1.0;
  cfg.delta = 1.0 / 6.0;
  cfg.modes = modes;
  cfg.phi = ScalarFunction::rational(1.0 / 6.0, 1.0, 1.0, 1.0);
  return cfg;
}

/// <(u_a . grad) u_b, u_c> by direct quadrature over the basis table.
double trilinear(const StreamFunctionBasis& basis, const Vec& a, const Vec& b, const Vec& c)
{
  double total = 0.0;
  for (int q = 0; q < basis.node_count(); ++q) {
    double ua[2] = {0, 0}, uc[2] = {0, 0}, gb[2][2] = {{0, 0}, {0, 0}};
    for (int k = 0; k < basis.size(); ++k) {
      const auto& s = basis.at(k, q);
      for (int i = 0; i < 2; ++i) {
        ua[i] += a[k] * s.u[i];
        uc[i] += c[k] * s.u[i];
        for (int j = 0; j < 2; ++j)
          gb[i][j] += b[k] * s.grad[i][j];
      }
    }
    double v = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        v += ua[j] * gb[i][j] * uc[i];
    total += basis.weight(q) * v;
  }
  return total;
}

} // namespace

TEST_CASE("Gauss-Legendre rule is exact to degree 2n - 1")
{
  for (int n : {1, 3, 6}) {
    const auto [x, w] = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += w[i] * std::pow(x[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("basis is divergence free and vanishes on the boundary")
{
  const StreamFunctionBasis basis(8);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < basis.size(); ++k) {
    for (int i = 0; i < 50; ++i) {
      const double x = unit(rng), y = unit(rng);
      const auto s = basis.eval(k, x, y);
      REQUIRE(std::abs(s.grad[0][0] + s.grad[1][1]) <= 1e-12);
      // analytic gradient against central differences
      const double h = 1e-6;
      const auto sx = basis.eval(k, x + h, y), sxm = basis.eval(k, x - h, y);
      const auto sy = basis.eval(k, x, y + h), sym = basis.eval(k, x, y - h);
      for (int c = 0; c < 2; ++c) {
        REQUIRE(s.grad[c][0] == doctest::Approx((sx.u[c] - sxm.u[c]) / (2 * h)).epsilon(1e-6).scale(1.0));
        REQUIRE(s.grad[c][1] == doctest::Approx((sy.u[c] - sym.u[c]) / (2 * h)).epsilon(1e-6).scale(1.0));
      }
    }
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
      for (const auto& s : {basis.eval(k, 0.0, t), basis.eval(k, 1.0, t), basis.eval(k, t, 0.0), basis.eval(k, t, 1.0)}) {
        CHECK(std::abs(s.u[0]) <= 1e-15);
        CHECK(std::abs(s.u[1]) <= 1e-15);
      }
    }
  }
}

TEST_CASE("Gram matrices are symmetric positive definite")
{
  const NavierStokesOperator op(rational_config(8));
  for (const Mat* m : {&op.stiffness(), &op.mass()}) {
    CHECK((*m - m->transpose()).cwiseAbs().maxCoeff() <= 1e-14 * m->cwiseAbs().maxCoeff());
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(*m).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("convection is skew symmetric")
{
  const NavierStokesOperator op(rational_config(6));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec a = testing::gaussian(op.size(), rng);
    const Vec b = testing::gaussian(op.size(), rng);
    const Vec c = testing::gaussian(op.size(), rng);
    const double abc = trilinear(op.basis(), a, b, c);
    const double acb = trilinear(op.basis(), a, c, b);
    const double scale = 1.0 + std::abs(abc);
    REQUIRE(std::abs(abc + acb) <= 1e-10 * scale);
    REQUIRE(std::abs(op.convection(a).dot(a)) <= 1e-10 * (1.0 + a.squaredNorm() * a.norm()));
    REQUIRE(op.convection(a).dot(c) == doctest::Approx(trilinear(op.basis(), a, a, c)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("operator at rest")
{
  NSConfig cfg;
  cfg.modes = 1;
  const auto d = build_ns_operator(cfg);
  CHECK(d.f(Vec::Zero(1)).norm() == 0.0);
}

TEST_CASE("condition verification")
{
  NSConfig stokes;
  CHECK(verify_ns_conditions(stokes, 100, 1).all_pass());

  NSConfig flat;
  flat.phi = ScalarFunction::constant_value(flat.nu / 3.0);
  const auto flat_report = verify_ns_conditions(flat, 100, 1);
  CHECK_FALSE(flat_report.checks[0].pass);
  CHECK_FALSE(flat_report.all_pass());

  const auto rational = verify_ns_conditions(rational_config(), 1000, 3);
  CHECK(rational.checks[0].pass);
  CHECK(rational.checks[1].pass);
  CHECK(rational.checks[2].pass);
  CHECK(rational.all_pass());
}

TEST_CASE("comparison constant against the Stokes part")
{
  const auto d = build_ns_operator(rational_config());
  SamplerConfig s;
  s.n_sphere = 128;
  CHECK(estimate_comparison_k(d, s) >= 2.0 / 3.0);
}

TEST_CASE("steady solves")
{
  const auto cfg = rational_config();
  NSOperatorPtr op;
  const auto d = build_ns_operator(cfg, &op);

  SUBCASE("zero forcing")
  {
    const auto trace = solve_ns_steady(d, Vec::Zero(op->size()), {});
    CHECK(trace.converged());
    CHECK(trace.x.norm() == 0.0);
  }

  SUBCASE("small forcing matches Stokes")
  {
    const Vec rhs = 1e-6 * op->project([](double x, double y) -> std::array<double, 2> { return {-(y - 0.5), x - 0.5}; });
    const auto trace = solve_ns_steady(d, rhs, {});
    REQUIRE(trace.converged());
    const Vec stokes = (cfg.nu * op->stiffness()).ldlt().solve(rhs);
    CHECK((trace.x - stokes).norm() <= 1e-2 * stokes.norm());
  }

  SUBCASE("moderate forcing against damped Newton")
  {
    const Vec rhs = op->project([](double x, double y) -> std::array<double, 2> { return {-20 * (y - 0.5), 20 * (x - 0.5)}; });
    SolveConfig sc;
    sc.max_iter = 300;
    const auto trace = solve_ns_steady(d, rhs, sc);
    REQUIRE(trace.converged());
    const Vec newton =
      oracle::damped_newton([&](const Vec& c) -> Vec { return op->eval(c) - rhs; }, Vec::Zero(op->size()), 1e-12);
    CHECK((trace.x - newton).norm() <= 1e-6 * newton.norm());

    const auto other = solve_ns_steady(d, rhs, sc, 0.1 * Vec::Ones(op->size()));
    REQUIRE(other.converged());
    CHECK((other.x - trace.x).norm() <= 1e-6 * (1.0 + trace.x.norm()));
  }
}

TEST_CASE("under-resolved quadrature is rejected")
{
  auto cfg = rational_config(4);
  cfg.quadrature_order = 2;
  CHECK_THROWS_AS(NavierStokesOperator{cfg}, QuadratureUnderResolved);
}

TEST_CASE("time stepping")
{
  const auto cfg = rational_config();
  NSOperatorPtr op;
  build_ns_operator(cfg, &op);

  const auto rest = evolve_ns(op, [&](double) { return Vec::Zero(op->size()); }, 1.0, 0.1, {});
  REQUIRE(rest.states.size() == 11);
  for (const auto& s : rest.states)
    CHECK(s.norm() == 0.0);

  const Vec a = op->project([](double x, double y) -> std::array<double, 2> { return {-20 * (y - 0.5), 20 * (x - 0.5)}; });
  const Vec b = op->project([](double, double y) -> std::array<double, 2> { return {10 * std::sin(6.0 * y), 0.0}; });
  const auto forced = evolve_ns(op, [&](double t) -> Vec { return std::cos(3.0 * t) * a + b; }, 1.0, 0.05, {});
  CHECK_FALSE(forced.rejected_step);
  CHECK(forced.energy_ok);
  CHECK(forced.states.size() == 21);

  CHECK_THROWS_AS(evolve_ns(op, [&](double) { return Vec::Zero(op->size()); }, 1.0, 1e-5, {}), ConfigError);
}
