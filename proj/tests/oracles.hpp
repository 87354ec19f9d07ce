#pragma once

// Reference solvers used only by the tests. They share nothing with the library's
// recurrence: plain bisection, plain Banach iteration, textbook damped Newton.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

// Values computed with mpmath at 30 digits.
inline constexpr double kFourthRootTwo = 1.18920711500272106671749997056;
inline constexpr double kSinPerturbedRootAt1 = 0.817619984193676483846678504141;  // x + sin(x)/4 = 1
inline constexpr double kSinPerturbedRootAt10 = 10.1694287709853244520401138139;  // x + sin(x)/4 = 10
inline constexpr double kHalfCosFixedPoint = 0.450183611294873573036538696763;    // x = cos(x)/2
inline constexpr double kCubeRootHalf = 0.793700525984099737375852819636;         // x^3 = 1/2

inline double bisect(const std::function<double(double)>& g, double lo, double hi, double tol = 1e-15)
{
  double glo = g(lo);
  if (glo * g(hi) > 0.0)
    throw std::invalid_argument("bisect: no sign change");
  for (int i = 0; i < 400 && hi - lo > tol * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double banach(const std::function<double(double)>& t, double x, double tol = 1e-14)
{
  for (int i = 0; i < 10000; ++i) {
    const double next = t(x);
    if (std::abs(next - x) <= tol)
      return next;
    x = next;
  }
  throw std::runtime_error("banach: no convergence");
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Damped Newton with forward-difference Jacobian on F(x) = 0; Euclidean residual.
inline Vec damped_newton(const std::function<Vec(const Vec&)>& F, Vec x, double tol = 1e-12, int max_iter = 100)
{
  Vec r = F(x);
  for (int it = 0; it < max_iter && r.norm() > tol; ++it) {
    Mat J(r.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-7 * (1.0 + std::abs(x[j]));
      Vec xp = x;
      xp[j] += h;
      Vec xm = x;
      xm[j] -= h;
      J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
    }
    const Vec step = J.fullPivLu().solve(r);
    double t = 1.0;
    for (int ls = 0; ls < 50; ++ls) {
      const Vec trial = x - t * step;
      const Vec rt = F(trial);
      if (rt.norm() < (1.0 - 1e-4 * t) * r.norm()) {
        x = trial;
        r = rt;
        break;
      }
      t *= 0.5;
      if (ls == 49)
        return x;
    }
  }
  return x;
}

} // namespace oracle
