#include "compsolve/operators.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace compsolve {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm(const Vec& v)
{
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Smallest residual an inner solve can be asked for: the caller's tolerance
/// plus the rounding floor of evaluating f0 near x.
double inner_threshold(const InnerSolverConfig& inner, const Vec& z, const Mat& jac, const Vec& x)
{
  const double jnorm = jac.size() == 0 ? 0.0 : jac.cwiseAbs().rowwise().sum().maxCoeff();
  return inner.tol * (1.0 + inf_norm(z)) + 64.0 * kEps * jnorm * inf_norm(x);
}

} // namespace

Mapping::Mapping(Space domain, Space codomain, Eval eval, Ball ball, Jacobian jacobian)
  : domain_(std::move(domain))
  , codomain_(std::move(codomain))
  , eval_(std::move(eval))
  , ball_(std::move(ball))
  , jacobian_(std::move(jacobian))
{
  domain_.check(ball_.center);
  if (!(ball_.radius > 0.0))
    throw ConfigError("ball radius must be positive");
}

bool Mapping::contains(const Vec& x) const
{
  if (x.size() != domain_.dim())
    return false;
  return domain_.norm(x - ball_.center) <= ball_.radius * (1.0 + 1e-12);
}

Vec Mapping::operator()(const Vec& x) const
{
  domain_.check(x);
  if (!contains(x))
    throw OutOfDomain(fmt::format("point at distance {} from the center of a ball of radius {}",
                                  domain_.norm(x - ball_.center), ball_.radius));
  Vec y = eval_(x);
  if (y.size() != codomain_.dim())
    throw DimensionMismatch(codomain_.dim(), y.size());
  return y;
}

Mat Mapping::jacobian(const Vec& x, double h) const
{
  if (jacobian_)
    return jacobian_(x);
  return finite_difference_jacobian(eval_, x, h);
}

Mapping Mapping::with_ball(Ball ball) const
{
  return Mapping(domain_, codomain_, eval_, std::move(ball), jacobian_);
}

Mat finite_difference_jacobian(const Mapping::Eval& f, const Vec& x, double h)
{
  if (h <= 0.0)
    h = std::cbrt(kEps) * (1.0 + inf_norm(x));
  const Vec f_at = f(x);
  Mat jac(f_at.size(), x.size());
  Vec probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const Vec plus = f(probe);
    probe[j] = x[j] - h;
    const Vec minus = f(probe);
    probe[j] = x[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

std::string_view to_string(SurrogateKind kind)
{
  switch (kind) {
    case SurrogateKind::Linear: return "Linear";
    case SurrogateKind::FrozenJacobian: return "FrozenJacobian";
    case SurrogateKind::MonotoneBlend: return "MonotoneBlend";
    case SurrogateKind::DiagonalMonotone: return "DiagonalMonotone";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------

AffineSurrogate::AffineSurrogate(SurrogateKind kind, Mat matrix, Vec anchor, Vec offset,
                                 InnerSolverConfig inner)
  : Surrogate(inner)
  , kind_(kind)
  , matrix_(std::move(matrix))
  , anchor_(std::move(anchor))
  , offset_(std::move(offset))
{
  if (matrix_.rows() != matrix_.cols())
    throw DimensionMismatch(matrix_.rows(), matrix_.cols());
  if (anchor_.size() != matrix_.cols())
    throw DimensionMismatch(matrix_.cols(), anchor_.size());
  if (offset_.size() != matrix_.rows())
    throw DimensionMismatch(matrix_.rows(), offset_.size());
  if (!matrix_.allFinite())
    throw NonFiniteEntry();
  lu_.compute(matrix_);
  const double rcond = lu_.rcond();
  if (!(rcond > kEps))
    throw SingularJacobian(fmt::format("surrogate matrix is singular (rcond = {:.3g})", rcond));
}

Vec AffineSurrogate::eval(const Vec& x) const
{
  return offset_ + matrix_ * (x - anchor_);
}

Vec AffineSurrogate::solve(const Vec& z, const Vec& /*guess*/) const
{
  if (z.size() != matrix_.rows())
    throw DimensionMismatch(matrix_.rows(), z.size());
  Vec x = anchor_ + lu_.solve(z - offset_);
  // one step of iterative refinement
  const Vec r = eval(x) - z;
  x -= lu_.solve(r);
  const double res = inf_norm(eval(x) - z);
  if (!(res <= inner_threshold(inner_, z, matrix_, x)))
    throw SurrogateSolveFailed(fmt::format("affine solve residual {:.3g} above tolerance", res));
  return x;
}

// ---------------------------------------------------------------------------

MonotoneBlendSurrogate::MonotoneBlendSurrogate(Mapping upper, Mapping lower, double lambda, double rho,
                                               InnerSolverConfig inner)
  : Surrogate(inner), upper_(std::move(upper)), lower_(std::move(lower)), lambda_(lambda), rho_(rho)
{
  if (lambda_ < 0.0 || rho_ < 0.0 || std::abs(lambda_ + rho_ - 1.0) > 1e-12)
    throw ConfigError(fmt::format("blend weights must be nonnegative and sum to 1 (got {}, {})", lambda_, rho_));
  if (upper_.domain().dim() != lower_.domain().dim())
    throw DimensionMismatch(upper_.domain().dim(), lower_.domain().dim());
}

Vec MonotoneBlendSurrogate::eval(const Vec& x) const
{
  return lambda_ * upper_.eval_unchecked(x) + rho_ * lower_.eval_unchecked(x);
}

Vec MonotoneBlendSurrogate::solve(const Vec& z, const Vec& guess) const
{
  Vec x = guess;
  Vec r = eval(x) - z;
  double rnorm = r.norm();
  for (int it = 0; it < inner_.max_iter; ++it) {
    const Mat jac = lambda_ * upper_.jacobian(x) + rho_ * lower_.jacobian(x);
    if (inf_norm(r) <= inner_threshold(inner_, z, jac, x))
      return x;
    Eigen::PartialPivLU<Mat> lu(jac);
    if (!(lu.rcond() > kEps))
      throw SingularJacobian("blend surrogate Jacobian is singular");
    const Vec step = lu.solve(r);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec trial = x - t * step;
      const Vec r_trial = eval(trial) - z;
      const double n_trial = r_trial.norm();
      if (n_trial <= (1.0 - 1e-4 * t) * rnorm || n_trial == 0.0) {
        x = trial;
        r = r_trial;
        rnorm = n_trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // stagnation at the rounding floor counts as success
      const Mat jac_here = lambda_ * upper_.jacobian(x) + rho_ * lower_.jacobian(x);
      if (inf_norm(r) <= 16.0 * inner_threshold(inner_, z, jac_here, x))
        return x;
      throw SurrogateSolveFailed(fmt::format("blend Newton stalled at residual {:.3g}", rnorm));
    }
  }
  throw SurrogateSolveFailed(fmt::format("blend Newton exhausted {} iterations (residual {:.3g})",
                                         inner_.max_iter, rnorm));
}

// ---------------------------------------------------------------------------

DiagonalMonotoneSurrogate::DiagonalMonotoneSurrogate(ScalarFunction phi, InnerSolverConfig inner)
  : Surrogate(inner), phi_(std::move(phi))
{}

Vec DiagonalMonotoneSurrogate::eval(const Vec& x) const
{
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = phi_(x[i]) * x[i];
  return out;
}

double DiagonalMonotoneSurrogate::solve_scalar(double target, double guess) const
{
  auto psi = [this](double t) { return phi_(t) * t; };
  const double tol = inner_.tol * (1.0 + std::abs(target));

  double t = std::isfinite(guess) ? guess : 0.0;
  double value = psi(t) - target;
  if (std::abs(value) <= tol)
    return t;

  // bracket the root; psi is increasing
  double lo = t, hi = t;
  double f_lo = value, f_hi = value;
  double step = 1.0 + std::abs(t);
  int expansions = 0;
  while (f_lo > 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo -= step;
    f_lo = psi(lo) - target;
    step *= 2.0;
    if (++expansions > 200)
      throw SurrogateSolveFailed("diagonal surrogate: no bracket below");
  }
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi += step;
    f_hi = psi(hi) - target;
    step *= 2.0;
    if (++expansions > 200)
      throw SurrogateSolveFailed("diagonal surrogate: no bracket above");
  }

  t = std::clamp(t, lo, hi);
  value = psi(t) - target;
  for (int it = 0; it < std::max(inner_.max_iter, 200); ++it) {
    if (std::abs(value) <= tol)
      return t;
    if (value < 0.0)
      lo = t;
    else
      hi = t;
    if (hi - lo <= 4.0 * kEps * std::max(1.0, std::abs(t)))
      return t;
    const double slope = phi_(t) + phi_.slope(t) * t;
    double next = slope > 0.0 ? t - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    t = next;
    value = psi(t) - target;
  }
  throw SurrogateSolveFailed(fmt::format("diagonal surrogate: scalar solve for {} did not converge", target));
}

Vec DiagonalMonotoneSurrogate::solve(const Vec& z, const Vec& guess) const
{
  Vec x(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    x[i] = solve_scalar(z[i], guess.size() == z.size() ? guess[i] : 0.0);
  return x;
}

// ---------------------------------------------------------------------------

Vec Decomposition::eval_f1(const Vec& x) const
{
  return f(x) - f0->eval(x);
}

SurrogatePtr linear_surrogate(Mat matrix, InnerSolverConfig inner)
{
  const auto n = matrix.cols();
  const auto m = matrix.rows();
  return std::make_shared<AffineSurrogate>(SurrogateKind::Linear, std::move(matrix), Vec::Zero(n),
                                           Vec::Zero(m), inner);
}

SurrogatePtr identity_surrogate(int dim)
{
  return linear_surrogate(Mat::Identity(dim, dim));
}

SurrogatePtr frozen_jacobian_surrogate(const Mapping& f, const Vec& x0, double h, InnerSolverConfig inner)
{
  f.domain().check(x0);
  Mat jac = finite_difference_jacobian([&f](const Vec& x) { return f.eval_unchecked(x); }, x0, h);
  Vec fx0 = f.eval_unchecked(x0);
  return std::make_shared<AffineSurrogate>(SurrogateKind::FrozenJacobian, std::move(jac), x0,
                                           std::move(fx0), inner);
}

SurrogatePtr monotone_blend_surrogate(Mapping upper, Mapping lower, double lambda, double rho,
                                      InnerSolverConfig inner)
{
  return std::make_shared<MonotoneBlendSurrogate>(std::move(upper), std::move(lower), lambda, rho, inner);
}

SurrogatePtr diagonal_monotone_surrogate(ScalarFunction phi, InnerSolverConfig inner)
{
  return std::make_shared<DiagonalMonotoneSurrogate>(std::move(phi), inner);
}

} // namespace compsolve
