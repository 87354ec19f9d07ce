#pragma once

#include "compsolve/grid.hpp"
#include "compsolve/solve.hpp"

#include <array>
#include <functional>

namespace compsolve {

/// a_i(x, xi, eta) of the divergence-form operator -sum_i D_i(a_i D_i u).
/// eta[0] is the difference along `axis`, eta[1] the averaged cross difference (0 in 1D).
using EllipticCoefficient =
  std::function<double(int axis, const Point& x, double xi, const std::array<double, 2>& eta)>;

/// Envelope bound b_i(x) or c_i(x) evaluated at an edge midpoint.
using EdgeBound = std::function<double(int axis, const Point& x)>;

struct EllipticCoefficients
{
  ScalarFunction phi;
  EdgeBound b;
  EdgeBound c;
  double lambda = 0.5;
  double rho = 0.5;

  static EdgeBound constant(double v)
  {
    return [v](int, const Point&) { return v; };
  }
};

struct EllipticOptions
{
  double p = 2.0;
  double radius = 10.0;         ///< ball radius in the discrete W^{1,p}_0 norm
  int envelope_samples = 4096;  ///< random (edge, xi, eta) probes of c phi <= a <= b phi
  std::uint64_t seed = 0;
};

/// f(u) = G^T (a(x_e, xi_e, eta_e) G u) on the interior nodes, with f0 the monotone blend of
/// G^T(b phi(Gu) Gu) and G^T(c phi(Gu) Gu). Throws CoefficientEnvelopeViolated with a witness.
Decomposition build_elliptic_operator(const Grid& grid, const EllipticCoefficients& coeffs,
                                      const EllipticCoefficient& a, const EllipticOptions& opts = {});

/// solve_comparison from u = 0.
SolveTrace solve_elliptic(const Decomposition& d, const Vec& rhs, const SolveConfig& cfg);

/// Nodal samples of g on the interior nodes.
Vec sample_on_grid(const Grid& grid, const std::function<double(const Point&)>& g);

} // namespace compsolve
