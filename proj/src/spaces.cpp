#include "compsolve/spaces.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace compsolve {

namespace {

void check_exponent(double p)
{
  if (!(p > 1.0) || !std::isfinite(p))
    throw UnsupportedNorm(fmt::format("norm exponent must satisfy 1 < p < inf, got {}", p));
}

double conjugate(double p)
{
  return p / (p - 1.0);
}

/// Overflow-safe l^p norm.
double lp_norm(const Vec& v, double p)
{
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0)
    return 0.0;
  if (p == 2.0)
    return (v / scale).norm() * scale;
  return std::pow((v.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p) * scale;
}

/// |t|^{p-2} t, zero at t = 0.
Vec signed_power(const Vec& v, double p)
{
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    out[i] = a == 0.0 ? 0.0 : std::pow(a, p - 1.0) * (v[i] > 0 ? 1.0 : -1.0);
  }
  return out;
}

Vec lp_duality_map(const Vec& x, double p)
{
  const double nx = lp_norm(x, p);
  if (nx == 0.0)
    return Vec::Zero(x.size());
  // scale first so |x_i|^{p-1} cannot overflow
  const Vec u = x / nx;
  return signed_power(u, p) * nx;
}

/// sup <y, x> / |x|_{W^{1,p}} via the minimizer of (1/p)|x|^p - <y, x>.
double sobolev_dual_norm(const Grid& grid, double p, const Vec& y)
{
  const double w = grid.cell_volume();
  if (y.cwiseAbs().maxCoeff() == 0.0)
    return 0.0;
  const auto& G = grid.gradient();
  Vec x = grid.solve_laplacian(y);
  if (p != 2.0) {
    auto objective = [&](const Vec& z) {
      const Vec g = G * z;
      return g.cwiseAbs().array().pow(p).sum() / p - y.dot(z);
    };
    // match the p-homogeneity of the minimizer before iterating
    {
      const Vec g = G * x;
      const double gp = g.cwiseAbs().array().pow(p).sum();
      const double yx = y.dot(x);
      if (gp > 0.0 && yx > 0.0)
        x *= std::pow(yx / gp, 1.0 / (p - 1.0));
    }
    double phi = objective(x);
    Eigen::SimplicialLDLT<SparseMat> solver;
    for (int it = 0; it < 200; ++it) {
      const Vec g = G * x;
      const Vec r = Vec(G.transpose() * signed_power(g, p)) - y;
      if (r.norm() <= 1e-14 * y.norm())
        break;
      const double gmax = g.cwiseAbs().maxCoeff();
      const double floor = std::max(1e-8 * gmax, std::numeric_limits<double>::min());
      Vec weights(g.size());
      for (Eigen::Index e = 0; e < g.size(); ++e)
        weights[e] = (p - 1.0) * std::pow(std::max(std::abs(g[e]), floor), p - 2.0);
      SparseMat H = G.transpose() * weights.asDiagonal() * G;
      solver.compute(H);
      if (solver.info() != Eigen::Success)
        break;
      const Vec step = solver.solve(r);
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec trial = x - t * step;
        const double phi_trial = objective(trial);
        if (phi_trial <= phi - 1e-4 * t * r.dot(step)) {
          x = trial;
          phi = phi_trial;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted)
        break;
    }
  }
  const Vec g = G * x;
  const double nx = std::pow(w, 1.0 / p) * lp_norm(g, p);
  if (nx == 0.0)
    return 0.0;
  return w * y.dot(x) / nx;
}

} // namespace

Space::Space(int dim, NormKind kind, bool dual, std::string label)
  : dim_(dim), kind_(std::move(kind)), dual_(dual), label_(std::move(label))
{
  if (dim_ < 1)
    throw ConfigError("space dimension must be at least 1");
}

Space Space::lp(int dim, double p, std::string label)
{
  check_exponent(p);
  if (label.empty())
    label = fmt::format("l{}", p);
  return Space(dim, LpNorm{p}, false, std::move(label));
}

Space Space::sobolev(const Grid& grid, double p, std::string label)
{
  check_exponent(p);
  if (label.empty())
    label = fmt::format("W1,{}", p);
  return Space(grid.node_count(), SobolevNorm{p, grid}, false, std::move(label));
}

Space Space::energy(Mat gram, std::string label)
{
  if (gram.rows() != gram.cols())
    throw DimensionMismatch(gram.rows(), gram.cols());
  auto factor = std::make_shared<Eigen::LLT<Mat>>(gram);
  if (factor->info() != Eigen::Success)
    throw ConfigError("energy Gram matrix is not positive definite");
  const int dim = static_cast<int>(gram.rows());
  if (label.empty())
    label = "energy";
  return Space(dim, EnergyNorm{std::make_shared<const Mat>(std::move(gram)), std::move(factor)},
               false, std::move(label));
}

double Space::exponent() const
{
  return std::visit(
    [this](const auto& k) -> double {
      using T = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<T, EnergyNorm>)
        return 2.0;
      else if constexpr (std::is_same_v<T, LpNorm>)
        return k.p;
      else
        return dual_ ? conjugate(k.p) : k.p;
    },
    kind_);
}

Space Space::dual() const
{
  if (const auto* lp = std::get_if<LpNorm>(&kind_)) {
    const double q = conjugate(lp->p);
    return Space(dim_, LpNorm{q}, false, fmt::format("l{}", q));
  }
  return Space(dim_, kind_, !dual_, dual_ ? label_.substr(0, label_.size() - 1) : label_ + "*");
}

bool Space::compatible(const Space& other) const
{
  return dim_ == other.dim_;
}

void Space::check(const Vec& v) const
{
  if (v.size() != dim_)
    throw DimensionMismatch(dim_, v.size());
  if (!v.allFinite())
    throw NonFiniteEntry();
}

double Space::norm(const Vec& v) const
{
  check(v);
  return std::visit(
    [&](const auto& k) -> double {
      using T = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<T, LpNorm>) {
        return lp_norm(v, k.p);
      } else if constexpr (std::is_same_v<T, SobolevNorm>) {
        if (dual_)
          return sobolev_dual_norm(k.grid, k.p, v);
        const Vec g = k.grid.gradient() * v;
        return std::pow(k.grid.cell_volume(), 1.0 / k.p) * lp_norm(g, k.p);
      } else {
        const double sq = dual_ ? v.dot(k.factor->solve(v)) : v.dot(*k.gram * v);
        return std::sqrt(std::max(sq, 0.0));
      }
    },
    kind_);
}

double Space::pair(const Vec& y_star, const Vec& x) const
{
  if (y_star.size() != dim_)
    throw DimensionMismatch(dim_, y_star.size());
  if (x.size() != dim_)
    throw DimensionMismatch(dim_, x.size());
  const double s = y_star.dot(x);
  if (const auto* sob = std::get_if<SobolevNorm>(&kind_))
    return sob->grid.cell_volume() * s;
  return s;
}

Vec Space::duality_map(const Vec& x) const
{
  check(x);
  return std::visit(
    [&](const auto& k) -> Vec {
      using T = std::decay_t<decltype(k)>;
      if constexpr (std::is_same_v<T, LpNorm>) {
        return lp_duality_map(x, k.p);
      } else if constexpr (std::is_same_v<T, SobolevNorm>) {
        if (dual_)
          throw UnsupportedNorm("duality map of a W^{-1,q} space is not available");
        // transport the l^p map of the gradient back through G^T
        const double w = k.grid.cell_volume();
        const Vec g = k.grid.gradient() * x;
        const double ng = lp_norm(g, k.p);
        if (ng == 0.0)
          return Vec::Zero(dim_);
        const Vec edge = signed_power(g / ng, k.p) * ng;
        return Vec(k.grid.gradient().transpose() * edge) * std::pow(w, 2.0 / k.p - 1.0);
      } else {
        if (dual_)
          return k.factor->solve(x);
        return *k.gram * x;
      }
    },
    kind_);
}

double ScalarFunction::slope(double t) const
{
  if (derivative)
    return derivative(t);
  const double h = 1e-6 * (1.0 + std::abs(t));
  return (eval(t + h) - eval(t - h)) / (2.0 * h);
}

bool ScalarFunction::sampled_monotone(double lo, double hi, int samples) const
{
  double prev = eval(lo);
  for (int i = 1; i < samples; ++i) {
    const double t = lo + (hi - lo) * i / (samples - 1);
    const double v = eval(t);
    if (v < prev)
      return false;
    prev = v;
  }
  return true;
}

ScalarFunction ScalarFunction::constant_value(double c)
{
  ScalarFunction f;
  f.eval = [c](double) { return c; };
  f.derivative = [](double) { return 0.0; };
  f.monotone = true;
  f.constant = true;
  f.name = fmt::format("const({})", c);
  return f;
}

ScalarFunction ScalarFunction::saturating(double amplitude)
{
  ScalarFunction f;
  f.eval = [amplitude](double t) { return 1.0 + amplitude / (1.0 + t * t); };
  f.derivative = [amplitude](double t) {
    const double d = 1.0 + t * t;
    return -2.0 * amplitude * t / (d * d);
  };
  f.name = fmt::format("1+{}/(1+t^2)", amplitude);
  return f;
}

ScalarFunction ScalarFunction::rational(double c0, double c1, double rho, double sigma)
{
  ScalarFunction f;
  f.eval = [=](double t) {
    const double a = std::abs(t);
    if (a == 0.0 && rho > 0.0)
      return 0.0;
    return c0 * std::pow(a, rho) / (std::pow(a, sigma) + c1);
  };
  f.name = fmt::format("{}*t^{}/(t^{}+{})", c0, rho, sigma, c1);
  return f;
}

} // namespace compsolve
