#pragma once

#include "compsolve/grid.hpp"

#include <functional>
#include <memory>
#include <string>
#include <variant>

namespace compsolve {

/// Plain l^p norm on R^dim, 1 < p < inf.
struct LpNorm
{
  double p;
};

/// Discrete W^{1,p}_0: the L^p norm (node weight h^dim) of the forward-difference
/// gradient on a Dirichlet grid. Pairs with its dual through the weighted sum
/// h^dim * sum y_i x_i, the quadrature of the L^2 product.
struct SobolevNorm
{
  double p;
  Grid grid;
};

/// Hilbert norm sqrt(x^T M x) of a Galerkin coefficient space; M is the Gram
/// matrix of the basis.
struct EnergyNorm
{
  std::shared_ptr<const Mat> gram;
  std::shared_ptr<const Eigen::LLT<Mat>> factor;
};

using NormKind = std::variant<LpNorm, SobolevNorm, EnergyNorm>;

/// Finite-dimensional normed space, or the dual of one. Vectors are plain
/// coefficient arrays; the descriptor carries the norm and the pairing.
class Space
{
public:
  static Space lp(int dim, double p, std::string label = {});
  static Space sobolev(const Grid& grid, double p = 2.0, std::string label = {});
  static Space energy(Mat gram, std::string label = {});

  int dim() const { return dim_; }
  const NormKind& norm_kind() const { return kind_; }
  /// True for W^{-1,q} and energy duals. Duals of l^p are l^q and report false.
  bool is_dual() const { return dual_; }
  const std::string& label() const { return label_; }
  /// Exponent of this space's norm (q for a W^{-1,q} dual).
  double exponent() const;

  Space dual() const;

  double norm(const Vec& v) const;
  /// Norm of v regarded as an element of dual().
  double dual_norm(const Vec& v) const { return dual().norm(v); }

  /// <y_star, x> with y_star in dual() and x in this space.
  double pair(const Vec& y_star, const Vec& x) const;

  /// Normalized duality map: <x, J(x)> = |x|^2 and |J(x)|_* = |x|.
  Vec duality_map(const Vec& x) const;

  /// Throws DimensionMismatch or NonFiniteEntry.
  void check(const Vec& v) const;

  bool compatible(const Space& other) const;

private:
  Space(int dim, NormKind kind, bool dual, std::string label);

  int dim_;
  NormKind kind_;
  bool dual_;
  std::string label_;
};

/// Scalar data of the theory (growth, coercivity, viscosity modifiers).
struct ScalarFunction
{
  std::function<double(double)> eval;
  bool monotone = false;
  bool constant = false;
  std::function<double(double)> derivative;
  std::string name;

  double operator()(double t) const { return eval(t); }
  /// Analytic derivative when supplied, else a central difference.
  double slope(double t) const;

  /// Checks eval(t1) <= eval(t2) for t1 <= t2 on an even sample of [lo, hi].
  bool sampled_monotone(double lo, double hi, int samples = 1001) const;

  static ScalarFunction constant_value(double c);
  /// 1 + amplitude / (1 + t^2)
  static ScalarFunction saturating(double amplitude = 1.0);
  /// c0 |t|^rho (|t|^sigma + c1)^{-1}
  static ScalarFunction rational(double c0, double c1, double rho, double sigma);
};

} // namespace compsolve
