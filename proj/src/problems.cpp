#include "compsolve/problems.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace compsolve {

namespace {

template <typename T>
T get_or(const Json& desc, const char* key, T fallback)
{
  if (!desc.is_object() || !desc.contains(key) || desc.at(key).is_null())
    return fallback;
  try {
    return desc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("key '{}': {}", key, e.what()));
  }
}

std::string require_string(const Json& desc, const char* key)
{
  if (!desc.is_object() || !desc.contains(key) || !desc.at(key).is_string())
    throw ConfigError(fmt::format("missing string key '{}'", key));
  return desc.at(key).get<std::string>();
}

Mapping::Eval componentwise(std::function<double(double)> g)
{
  return [g = std::move(g)](const Vec& x) -> Vec { return x.unaryExpr(g); };
}

Mapping::Jacobian diagonal_jacobian(std::function<double(double)> dg)
{
  return [dg = std::move(dg)](const Vec& x) -> Mat { return Mat(x.unaryExpr(dg).asDiagonal()); };
}

const Json& section(const Json& desc, const char* key)
{
  static const Json empty = Json::object();
  if (desc.is_object() && desc.contains(key)) {
    if (!desc.at(key).is_object())
      throw ConfigError(fmt::format("'{}' must be an object", key));
    return desc.at(key);
  }
  return empty;
}

} // namespace

Vec vector_from_json(const Json& v, int dim, const std::string& what)
{
  if (v.is_number())
    return Vec::Constant(dim, v.get<double>());
  if (!v.is_array())
    throw ConfigError(fmt::format("{} must be a number or an array", what));
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(fmt::format("{} has {} entries, expected {}", what, v.size(), dim));
  Vec out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!v[i].is_number())
      throw ConfigError(fmt::format("{}[{}] is not a number", what, i));
    out[i] = v[i].get<double>();
  }
  if (!out.allFinite())
    throw NonFiniteEntry();
  return out;
}

ScalarFunction phi_from_json(const Json& desc)
{
  if (desc.is_null())
    return ScalarFunction::constant_value(1.0);
  if (desc.is_number())
    return ScalarFunction::constant_value(desc.get<double>());
  const std::string kind = require_string(desc, "kind");
  if (kind == "one")
    return ScalarFunction::constant_value(1.0);
  if (kind == "zero")
    return ScalarFunction::constant_value(0.0);
  if (kind == "constant")
    return ScalarFunction::constant_value(get_or(desc, "value", 1.0));
  if (kind == "saturating")
    return ScalarFunction::saturating(get_or(desc, "amplitude", 1.0));
  if (kind == "rational")
    return ScalarFunction::rational(get_or(desc, "c0", 1.0), get_or(desc, "c1", 1.0), get_or(desc, "rho", 1.0),
                                    get_or(desc, "sigma", 1.0));
  throw ConfigError(fmt::format("unknown phi kind '{}'", kind));
}

SamplerConfig sampler_from_json(const Json& desc, std::uint64_t seed)
{
  const Json& s = section(desc, "sampler");
  SamplerConfig cfg;
  cfg.n_sphere = get_or(s, "n_sphere", cfg.n_sphere);
  cfg.n_radii = get_or(s, "n_radii", cfg.n_radii);
  cfg.n_pairs = get_or(s, "n_pairs", cfg.n_pairs);
  cfg.m_max = get_or(s, "m_max", cfg.m_max);
  cfg.k1_floor = get_or(s, "k1_floor", cfg.k1_floor);
  cfg.degenerate_limit = get_or(s, "degenerate_limit", cfg.degenerate_limit);
  cfg.rng_seed = seed;
  cfg.validate();
  return cfg;
}

SolveConfig solver_from_json(const Json& desc, std::uint64_t seed)
{
  const Json& s = section(desc, "solver");
  SolveConfig cfg;
  cfg.tol = get_or(s, "tol", cfg.tol);
  cfg.max_iter = get_or(s, "max_iter", cfg.max_iter);
  cfg.radius_guard = get_or(s, "radius_guard", cfg.radius_guard);
  if (s.contains("sigma_hint") && !s.at("sigma_hint").is_null())
    cfg.sigma_hint = get_or(s, "sigma_hint", 0.0);
  if (s.contains("m0_hint") && !s.at("m0_hint").is_null())
    cfg.m0_hint = get_or(s, "m0_hint", 1);
  cfg.sampler = sampler_from_json(desc, seed);
  cfg.validate();
  return cfg;
}

Decomposition build_fixture(const Json& desc)
{
  const std::string problem = require_string(desc, "problem");
  const int dim = get_or(desc, "dim", 1);
  const double p = get_or(desc, "p", 2.0);
  const double radius = get_or(desc, "radius", 1.0);
  const Space X = Space::lp(dim, p);
  const Vec center = desc.contains("center") ? vector_from_json(desc.at("center"), dim, "center") : Vec::Zero(dim);
  const Ball ball{center, radius};

  std::optional<Mat> linear_part;
  Mapping::Eval eval;
  Mapping::Jacobian jac;
  std::string default_surrogate = "identity";
  ScalarFunction phi = ScalarFunction::saturating(get_or(desc, "amplitude", 1.0));

  if (problem == "identity" || problem == "linear" || problem == "neg-identity") {
    Mat A = Mat::Identity(dim, dim);
    if (problem == "neg-identity") {
      A = -A;
    } else if (desc.contains("matrix")) {
      const Json& m = desc.at("matrix");
      if (!m.is_array() || static_cast<int>(m.size()) != dim)
        throw ConfigError(fmt::format("matrix must have {} rows", dim));
      for (int i = 0; i < dim; ++i)
        A.row(i) = vector_from_json(m[i], dim, fmt::format("matrix[{}]", i)).transpose();
    } else {
      A *= get_or(desc, "scale", 1.0);
    }
    linear_part = A;
    eval = [A](const Vec& x) -> Vec { return A * x; };
    jac = [A](const Vec&) { return A; };
  } else if (problem == "sin-perturbed") {
    const double a = get_or(desc, "amplitude", 0.25);
    eval = componentwise([a](double t) { return t + a * std::sin(t); });
    jac = diagonal_jacobian([a](double t) { return 1.0 + a * std::cos(t); });
  } else if (problem == "cube") {
    eval = componentwise([](double t) { return t * t * t; });
    jac = diagonal_jacobian([](double t) { return 3.0 * t * t; });
  } else if (problem == "diag-monotone") {
    const double eps = get_or(desc, "epsilon", 0.1);
    eval = componentwise([phi, eps](double t) { return phi(t) * t + eps * std::sin(t); });
    jac = diagonal_jacobian([phi, eps](double t) { return phi(t) + phi.slope(t) * t + eps * std::cos(t); });
    default_surrogate = "diagonal-monotone";
  } else {
    throw ConfigError(fmt::format("unknown problem '{}'", problem));
  }

  Mapping f(X, X.dual(), eval, ball, jac);
  const std::string kind = get_or(desc, "surrogate", default_surrogate);
  SurrogatePtr f0;
  if (kind == "identity") {
    f0 = identity_surrogate(dim);
  } else if (kind == "linear") {
    f0 = linear_surrogate(Mat::Identity(dim, dim) * get_or(desc, "surrogate_scale", 1.0));
  } else if (kind == "exact") {
    if (!linear_part)
      throw ConfigError("surrogate 'exact' needs a linear problem");
    f0 = linear_surrogate(*linear_part);
  } else if (kind == "frozen-jacobian") {
    f0 = frozen_jacobian_surrogate(f, center);
  } else if (kind == "diagonal-monotone") {
    f0 = diagonal_monotone_surrogate(phi);
  } else {
    throw ConfigError(fmt::format("unknown surrogate '{}'", kind));
  }
  return {f, f0};
}

Mapping build_fixed_point_map(const Json& desc)
{
  const int dim = get_or(desc, "dim", 1);
  const double p = get_or(desc, "p", 2.0);
  const double radius = get_or(desc, "radius", 10.0);
  const Space X = Space::lp(dim, p);
  const Vec center = desc.contains("center") ? vector_from_json(desc.at("center"), dim, "center") : Vec::Zero(dim);
  const std::string map = require_string(desc, "map");
  Mapping::Eval eval;
  if (map == "cos") {
    const double a = get_or(desc, "amplitude", 0.5);
    eval = componentwise([a](double t) { return a * std::cos(t); });
  } else if (map == "constant") {
    const Vec c = vector_from_json(desc.contains("value") ? desc.at("value") : Json(0.0), dim, "value");
    eval = [c](const Vec&) { return c; };
  } else if (map == "scale") {
    const double k = get_or(desc, "factor", 0.5);
    eval = [k](const Vec& x) -> Vec { return k * x; };
  } else {
    throw ConfigError(fmt::format("unknown fixed-point map '{}'", map));
  }
  return Mapping(X, X, eval, {center, radius});
}

EllipticProblem build_elliptic_problem(const Json& desc, std::uint64_t seed)
{
  const int dim = get_or(desc, "dim", 1);
  const int n = get_or(desc, "n", 33);
  Grid grid(dim, n);

  EllipticCoefficients coeffs;
  coeffs.phi = phi_from_json(desc.contains("phi") ? desc.at("phi") : Json());
  coeffs.b = EllipticCoefficients::constant(get_or(desc, "b", 1.0));
  coeffs.c = EllipticCoefficients::constant(get_or(desc, "c", 1.0));
  coeffs.lambda = get_or(desc, "lambda", 0.5);
  coeffs.rho = get_or(desc, "rho", 0.5);

  const Json& cs = section(desc, "coefficient");
  const std::string kind = get_or<std::string>(cs, "kind", "phi");
  EllipticCoefficient a;
  const ScalarFunction phi = coeffs.phi;
  if (kind == "phi") {
    const double scale = get_or(cs, "scale", 1.0);
    a = [phi, scale](int, const Point&, double, const std::array<double, 2>& eta) { return scale * phi(eta[0]); };
  } else if (kind == "xi-modulated") {
    const double eps = get_or(cs, "epsilon", 0.2);
    a = [phi, eps](int, const Point&, double xi, const std::array<double, 2>& eta) {
      return (1.0 + eps * std::sin(xi)) * phi(eta[0]);
    };
  } else if (kind == "bump") {
    const double amp = get_or(cs, "amplitude", 1.0);
    a = [amp](int, const Point&, double, const std::array<double, 2>& eta) {
      return 1.0 + amp / (1.0 + eta[0] * eta[0]);
    };
  } else {
    throw ConfigError(fmt::format("unknown coefficient kind '{}'", kind));
  }

  EllipticOptions opts;
  opts.p = get_or(desc, "p", 2.0);
  opts.radius = get_or(desc, "radius", 10.0);
  opts.envelope_samples = get_or(desc, "envelope_samples", opts.envelope_samples);
  opts.seed = seed;
  auto d = build_elliptic_operator(grid, coeffs, a, opts);

  const Json& fs = section(desc, "forcing");
  const std::string fkind = get_or<std::string>(fs, "kind", "sine");
  const double amp = get_or(fs, "amplitude", 1.0);
  auto bump = [dim](const Point& x) {
    double v = std::sin(std::numbers::pi * x[0]);
    if (dim == 2)
      v *= std::sin(std::numbers::pi * x[1]);
    return v;
  };
  EllipticProblem out{grid, d, Vec(), std::nullopt};
  if (fkind == "sine") {
    const double pi2 = dim * std::numbers::pi * std::numbers::pi;
    out.rhs = sample_on_grid(grid, [&](const Point& x) { return amp * pi2 * bump(x); });
  } else if (fkind == "manufactured") {
    const Vec exact = sample_on_grid(grid, [&](const Point& x) { return amp * bump(x); });
    out.rhs = d.f.eval_unchecked(exact);
    out.exact = exact;
  } else if (fkind == "constant") {
    out.rhs = Vec::Constant(grid.node_count(), amp);
  } else {
    throw ConfigError(fmt::format("unknown forcing kind '{}'", fkind));
  }
  return out;
}

Vec ns_forcing(const NavierStokesOperator& op, const Json& forcing)
{
  if (forcing.is_null())
    return Vec::Zero(op.size());
  const std::string kind = require_string(forcing, "kind");
  if (kind == "load")
    return vector_from_json(forcing.at("values"), op.size(), "forcing.values");
  if (kind == "swirl") {
    const double amp = get_or(forcing, "amplitude", 1.0);
    return op.project([amp](double x, double y) -> std::array<double, 2> {
      return {-amp * (y - 0.5), amp * (x - 0.5)};
    });
  }
  if (kind == "shear") {
    const double amp = get_or(forcing, "amplitude", 1.0);
    return op.project([amp](double, double y) -> std::array<double, 2> {
      return {amp * std::sin(2.0 * std::numbers::pi * y), 0.0};
    });
  }
  throw ConfigError(fmt::format("unknown forcing kind '{}'", kind));
}

NSProblem build_ns_problem(const Json& desc)
{
  NSConfig cfg;
  cfg.nu = get_or(desc, "nu", 1.0);
  cfg.delta = get_or(desc, "delta", cfg.nu / 6.0);
  cfg.mu_cond11 = get_or(desc, "mu", 0.0);
  cfg.modes = get_or(desc, "modes", 4);
  cfg.quadrature_order = get_or(desc, "quadrature_order", 0);
  cfg.radius = get_or(desc, "radius", 10.0);
  if (desc.contains("alt_route_delta") && !desc.at("alt_route_delta").is_null())
    cfg.alt_route_delta = get_or(desc, "alt_route_delta", 0.0);
  if (desc.contains("phi")) {
    Json phi = desc.at("phi");
    // c0 may be given relative to the viscosity
    if (phi.is_object() && phi.contains("c0_over_nu"))
      phi["c0"] = phi.at("c0_over_nu").get<double>() * cfg.nu;
    cfg.phi = phi_from_json(phi);
  } else {
    cfg.phi = ScalarFunction::constant_value(0.0);
  }
  NSOperatorPtr op;
  auto d = build_ns_operator(cfg, &op);
  cfg.forcing = ns_forcing(*op, desc.contains("forcing") ? desc.at("forcing") : Json());
  return {cfg, op, d};
}

} // namespace compsolve
