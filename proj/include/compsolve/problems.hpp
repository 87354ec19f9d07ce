#pragma once

#include "compsolve/elliptic.hpp"
#include "compsolve/io.hpp"
#include "compsolve/navier_stokes.hpp"

#include <optional>
#include <string>

namespace compsolve {

/// Named finite-dimensional fixtures, selected by the "problem" key:
///   identity, linear (scale or matrix), neg-identity, sin-perturbed (amplitude),
///   cube, diag-monotone (amplitude, epsilon)
/// with common keys dim, p, radius, center and "surrogate" in
///   identity | linear | frozen-jacobian | diagonal-monotone | exact.
Decomposition build_fixture(const Json& desc);

/// f1 for the fixed-point command: "map" in cos (amplitude), constant (value), scale (factor).
Mapping build_fixed_point_map(const Json& desc);

SamplerConfig sampler_from_json(const Json& desc, std::uint64_t seed);
SolveConfig solver_from_json(const Json& desc, std::uint64_t seed);

/// Reads a vector of the given dimension; a scalar is broadcast.
Vec vector_from_json(const Json& v, int dim, const std::string& what);

ScalarFunction phi_from_json(const Json& desc);

struct EllipticProblem
{
  Grid grid;
  Decomposition decomposition;
  Vec rhs;
  std::optional<Vec> exact; ///< nodal exact solution when the forcing is manufactured
};

/// {dim, n, p, radius, phi, coefficient: {kind: phi|xi-modulated|bump, ...}, b, c, lambda, rho,
///  forcing: {kind: sine|manufactured|constant, amplitude}}
EllipticProblem build_elliptic_problem(const Json& desc, std::uint64_t seed);

struct NSProblem
{
  NSConfig config;
  NSOperatorPtr op;
  Decomposition decomposition;
};

/// {nu, delta, mu, modes, quadrature_order, radius, phi, forcing: {kind: load|swirl, ...}}
NSProblem build_ns_problem(const Json& desc);

/// Load vector of a forcing description on the given operator.
Vec ns_forcing(const NavierStokesOperator& op, const Json& forcing);

} // namespace compsolve
