#pragma once

#include "compsolve/operators.hpp"

#include <cmath>
#include <random>

namespace testing {

using compsolve::Vec;

inline Vec gaussian(int n, std::mt19937_64& rng, double scale = 1.0)
{
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i)
    v[i] = g(rng);
  return v;
}

inline compsolve::Mapping componentwise(int dim, double radius, std::function<double(double)> g,
                                        Vec center = Vec())
{
  const auto X = compsolve::Space::lp(dim, 2.0);
  if (center.size() == 0)
    center = Vec::Zero(dim);
  return compsolve::Mapping(X, X, [g](const Vec& x) -> Vec { return x.unaryExpr(g); }, {center, radius});
}

inline compsolve::Decomposition sin_fixture(int dim, double radius, double amplitude = 0.25)
{
  return {componentwise(dim, radius, [amplitude](double t) { return t + amplitude * std::sin(t); }),
          compsolve::identity_surrogate(dim)};
}

inline compsolve::Decomposition scaled_identity(int dim, double radius, double scale)
{
  return {componentwise(dim, radius, [scale](double t) { return scale * t; }), compsolve::identity_surrogate(dim)};
}

} // namespace testing
