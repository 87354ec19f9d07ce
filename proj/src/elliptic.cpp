#include "compsolve/elliptic.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace compsolve {

namespace {

struct EdgeState
{
  double xi;
  std::array<double, 2> eta;
};

std::vector<EdgeState> edge_states(const Grid& grid, const Vec& u, const Vec& g)
{
  std::vector<EdgeState> states(grid.edge_count());
  for (int e = 0; e < grid.edge_count(); ++e) {
    const auto& edge = grid.edge(e);
    const double lo = edge.lo >= 0 ? u[edge.lo] : 0.0;
    const double hi = edge.hi >= 0 ? u[edge.hi] : 0.0;
    states[e] = {0.5 * (lo + hi), {g[e], grid.cross_derivative(e, g)}};
  }
  return states;
}

/// G^T (w(e, g_e) g_e) with the Jacobian G^T diag(w + w' g) G when w depends on g only.
Mapping envelope_operator(const Grid& grid, const Space& X, const Ball& ball, const ScalarFunction& phi,
                          Vec weights)
{
  auto eval = [grid, phi, weights](const Vec& u) -> Vec {
    const Vec g = grid.gradient() * u;
    Vec flux(g.size());
    for (Eigen::Index e = 0; e < g.size(); ++e)
      flux[e] = weights[e] * phi(g[e]) * g[e];
    return grid.gradient().transpose() * flux;
  };
  auto jac = [grid, phi, weights](const Vec& u) -> Mat {
    const Vec g = grid.gradient() * u;
    Vec d(g.size());
    for (Eigen::Index e = 0; e < g.size(); ++e)
      d[e] = weights[e] * (phi(g[e]) + phi.slope(g[e]) * g[e]);
    const SparseMat& G = grid.gradient();
    return Mat(SparseMat(G.transpose() * d.asDiagonal() * G));
  };
  return Mapping(X, X.dual(), eval, ball, jac);
}

void check_envelope(const Grid& grid, const EllipticCoefficients& coeffs, const EllipticCoefficient& a,
                    const Vec& b, const Vec& c, const EllipticOptions& opts)
{
  const double scale = opts.radius * std::pow(grid.h(), -grid.dim() / opts.p);
  std::mt19937_64 rng(opts.seed ^ 0x5eedc0ffeeULL);
  std::uniform_int_distribution<int> pick_edge(0, grid.edge_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto magnitude = [&] {
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    if (unit(rng) < 0.1)
      return 0.0;
    return sign * scale * std::pow(10.0, -6.0 * unit(rng));
  };

  auto probe = [&](int e, double xi, std::array<double, 2> eta) {
    if (grid.dim() == 1)
      eta[1] = 0.0;
    const auto& edge = grid.edge(e);
    const double value = a(edge.axis, edge.midpoint, xi, eta);
    const double ph = coeffs.phi(eta[0]);
    const double upper = b[e] * ph;
    const double lower = c[e] * ph;
    const double slack = 1e-12 * (1.0 + std::abs(upper));
    if (!std::isfinite(value) || value > upper + slack || value < lower - slack)
      throw CoefficientEnvelopeViolated(
        fmt::format("a_{}(x=({:.4g},{:.4g}), xi={:.6g}, eta=({:.6g},{:.6g})) = {:.6g} outside [{:.6g}, {:.6g}]",
                    edge.axis, edge.midpoint[0], edge.midpoint[1], xi, eta[0], eta[1], value, lower, upper));
  };

  for (int e = 0; e < grid.edge_count(); ++e)
    probe(e, 0.0, {0.0, 0.0});
  for (int s = 0; s < opts.envelope_samples; ++s) {
    const int e = pick_edge(rng);
    const double xi = magnitude();
    const double eta0 = magnitude();
    const double eta1 = magnitude();
    probe(e, xi, {eta0, eta1});
  }
}

} // namespace

Vec sample_on_grid(const Grid& grid, const std::function<double(const Point&)>& g)
{
  Vec out(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k)
    out[k] = g(grid.node(k));
  return out;
}

Decomposition build_elliptic_operator(const Grid& grid, const EllipticCoefficients& coeffs,
                                      const EllipticCoefficient& a, const EllipticOptions& opts)
{
  if (!coeffs.phi.eval || !coeffs.b || !coeffs.c || !a)
    throw ConfigError("elliptic operator needs phi, b, c and the coefficient a");
  if (!(opts.radius > 0.0))
    throw ConfigError("elliptic ball radius must be positive");

  const int edges = grid.edge_count();
  Vec b(edges), c(edges);
  for (int e = 0; e < edges; ++e) {
    const auto& edge = grid.edge(e);
    b[e] = coeffs.b(edge.axis, edge.midpoint);
    c[e] = coeffs.c(edge.axis, edge.midpoint);
    if (!(c[e] > 0.0) || !(b[e] >= c[e]))
      throw ConfigError(fmt::format("envelope bounds need b >= c > 0, got b = {}, c = {} at ({:.4g}, {:.4g})",
                                    b[e], c[e], edge.midpoint[0], edge.midpoint[1]));
  }
  const double eta_max = opts.radius * std::pow(grid.h(), -grid.dim() / opts.p);
  for (int i = 0; i <= 200; ++i) {
    const double t = -eta_max + 2.0 * eta_max * i / 200.0;
    if (!(coeffs.phi(t) > 0.0) && t != 0.0)
      throw ConfigError(fmt::format("phi({}) = {} is not positive", t, coeffs.phi(t)));
  }
  check_envelope(grid, coeffs, a, b, c, opts);

  const Space X = Space::sobolev(grid, opts.p);
  const Ball ball{Vec::Zero(grid.node_count()), opts.radius};

  auto eval = [grid, a](const Vec& u) -> Vec {
    const Vec g = grid.gradient() * u;
    const auto states = edge_states(grid, u, g);
    Vec flux(g.size());
    for (int e = 0; e < grid.edge_count(); ++e) {
      const auto& edge = grid.edge(e);
      flux[e] = a(edge.axis, edge.midpoint, states[e].xi, states[e].eta) * g[e];
    }
    return grid.gradient().transpose() * flux;
  };
  Mapping f(X, X.dual(), eval, ball);

  auto upper = envelope_operator(grid, X, ball, coeffs.phi, b);
  auto lower = envelope_operator(grid, X, ball, coeffs.phi, c);
  return {f, monotone_blend_surrogate(std::move(upper), std::move(lower), coeffs.lambda, coeffs.rho)};
}

SolveTrace solve_elliptic(const Decomposition& d, const Vec& rhs, const SolveConfig& cfg)
{
  return solve_comparison(d, rhs, Vec::Zero(d.f.domain().dim()), cfg);
}

} // namespace compsolve
