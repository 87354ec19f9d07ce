#pragma once

#include "compsolve/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string_view>

namespace compsolve {

struct Ball
{
  Vec center;
  double radius;
};

/// A deterministic mapping f defined on a closed ball of its domain.
class Mapping
{
public:
  using Eval = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;

  Mapping(Space domain, Space codomain, Eval eval, Ball ball, Jacobian jacobian = {});

  const Space& domain() const { return domain_; }
  const Space& codomain() const { return codomain_; }
  const Ball& ball() const { return ball_; }

  bool contains(const Vec& x) const;

  /// Evaluates f(x); throws OutOfDomain outside the ball.
  Vec operator()(const Vec& x) const;

  /// Evaluates without the ball check (finite-difference stencils straddling the boundary).
  Vec eval_unchecked(const Vec& x) const { return eval_(x); }

  bool has_jacobian() const { return static_cast<bool>(jacobian_); }

  /// Analytic Jacobian when available, otherwise central differences with step h.
  Mat jacobian(const Vec& x, double h = 0.0) const;

  Mapping with_ball(Ball ball) const;

private:
  Space domain_;
  Space codomain_;
  Eval eval_;
  Ball ball_;
  Jacobian jacobian_;
};

/// Central-difference Jacobian; default step eps^{1/3} (1 + |x|_inf).
Mat finite_difference_jacobian(const Mapping::Eval& f, const Vec& x, double h = 0.0);

enum class SurrogateKind
{
  Linear,
  FrozenJacobian,
  MonotoneBlend,
  DiagonalMonotone
};

std::string_view to_string(SurrogateKind kind);

struct InnerSolverConfig
{
  double tol = 1e-12;
  int max_iter = 100;
};

/// The regular part f0 of a decomposition: evaluable and invertible.
class Surrogate
{
public:
  explicit Surrogate(InnerSolverConfig inner) : inner_(inner) {}
  virtual ~Surrogate() = default;

  virtual SurrogateKind kind() const = 0;
  virtual Vec eval(const Vec& x) const = 0;
  /// Returns x with |f0(x) - z|_inf <= tol (1 + |z|_inf); throws SurrogateSolveFailed.
  virtual Vec solve(const Vec& z, const Vec& guess) const = 0;

  const InnerSolverConfig& inner() const { return inner_; }

protected:
  InnerSolverConfig inner_;
};

using SurrogatePtr = std::shared_ptr<const Surrogate>;

/// f0(x) = offset + A (x - anchor); covers Linear (anchor = offset = 0) and FrozenJacobian.
class AffineSurrogate final : public Surrogate
{
public:
  AffineSurrogate(SurrogateKind kind, Mat matrix, Vec anchor, Vec offset, InnerSolverConfig inner = {});

  SurrogateKind kind() const override { return kind_; }
  Vec eval(const Vec& x) const override;
  Vec solve(const Vec& z, const Vec& guess) const override;

  const Mat& matrix() const { return matrix_; }
  const Vec& anchor() const { return anchor_; }

private:
  SurrogateKind kind_;
  Mat matrix_;
  Vec anchor_;
  Vec offset_;
  Eigen::PartialPivLU<Mat> lu_;
};

/// f0 = lambda f1_op + rho f2_op, inverted by damped Newton.
class MonotoneBlendSurrogate final : public Surrogate
{
public:
  MonotoneBlendSurrogate(Mapping upper, Mapping lower, double lambda, double rho, InnerSolverConfig inner = {});

  SurrogateKind kind() const override { return SurrogateKind::MonotoneBlend; }
  Vec eval(const Vec& x) const override;
  Vec solve(const Vec& z, const Vec& guess) const override;

  const Mapping& upper() const { return upper_; }
  const Mapping& lower() const { return lower_; }
  double lambda() const { return lambda_; }
  double rho() const { return rho_; }

private:
  Mapping upper_;
  Mapping lower_;
  double lambda_;
  double rho_;
};

/// f0(x)_i = phi(x_i) x_i with t -> phi(t) t increasing; inverted componentwise.
class DiagonalMonotoneSurrogate final : public Surrogate
{
public:
  explicit DiagonalMonotoneSurrogate(ScalarFunction phi, InnerSolverConfig inner = {});

  SurrogateKind kind() const override { return SurrogateKind::DiagonalMonotone; }
  Vec eval(const Vec& x) const override;
  Vec solve(const Vec& z, const Vec& guess) const override;

  /// Safeguarded Newton-bisection for phi(t) t = target.
  double solve_scalar(double target, double guess) const;

private:
  ScalarFunction phi_;
};

/// f = f0 + f1 with f1 derived as f - f0.
struct Decomposition
{
  Mapping f;
  SurrogatePtr f0;

  Vec eval_f(const Vec& x) const { return f(x); }
  Vec eval_f0(const Vec& x) const { return f0->eval(x); }
  Vec eval_f1(const Vec& x) const;
};

SurrogatePtr linear_surrogate(Mat matrix, InnerSolverConfig inner = {});
SurrogatePtr identity_surrogate(int dim);

/// f0(x) = f(x0) + A (x - x0), A the central-difference Jacobian at x0 with step h
/// (h <= 0 selects eps^{1/3} (1 + |x0|_inf)). Throws SingularJacobian.
SurrogatePtr frozen_jacobian_surrogate(const Mapping& f, const Vec& x0, double h = 0.0,
                                       InnerSolverConfig inner = {});

SurrogatePtr monotone_blend_surrogate(Mapping upper, Mapping lower, double lambda, double rho,
                                      InnerSolverConfig inner = {});

SurrogatePtr diagonal_monotone_surrogate(ScalarFunction phi, InnerSolverConfig inner = {});

/// Convenience: solve_surrogate(s, z, guess) == s.solve(z, guess).
inline Vec solve_surrogate(const Surrogate& s, const Vec& z, const Vec& guess)
{
  return s.solve(z, guess);
}

} // namespace compsolve
