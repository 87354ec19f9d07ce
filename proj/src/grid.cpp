#include "compsolve/grid.hpp"

#include "compsolve/errors.hpp"

#include <cmath>
#include <string>

namespace compsolve {

Grid::Grid(int dim, int n)
{
  if (dim != 1 && dim != 2)
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (n < 3)
    throw ConfigError("grid needs at least 3 interior points per axis, got " + std::to_string(n));

  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->n = n;
  impl->h = 1.0 / (n + 1);
  impl->cell_volume = std::pow(impl->h, dim);
  impl->node_count = dim == 1 ? n : n * n;

  const double h = impl->h;
  const int rows = dim == 1 ? 1 : n;
  // axis-0 edges: id = ex + (n+1)*iy, ex in [0, n]
  for (int iy = 0; iy < rows; ++iy) {
    for (int ex = 0; ex <= n; ++ex) {
      Edge e{};
      e.axis = 0;
      e.lo = ex == 0 ? -1 : (ex - 1) + n * iy;
      e.hi = ex == n ? -1 : ex + n * iy;
      e.midpoint = {(ex + 0.5) * h, dim == 1 ? 0.0 : (iy + 1) * h};
      e.cross = {-1, -1, -1, -1};
      impl->edges.push_back(e);
    }
  }
  if (dim == 2) {
    const int offset = (n + 1) * n;
    // axis-1 edges: id = offset + ix + n*ey, ey in [0, n]
    for (int ey = 0; ey <= n; ++ey) {
      for (int ix = 0; ix < n; ++ix) {
        Edge e{};
        e.axis = 1;
        e.lo = ey == 0 ? -1 : ix + n * (ey - 1);
        e.hi = ey == n ? -1 : ix + n * ey;
        e.midpoint = {(ix + 1) * h, (ey + 0.5) * h};
        e.cross = {-1, -1, -1, -1};
        impl->edges.push_back(e);
      }
    }
    auto x_edge = [n](int ex, int iy) { return ex + (n + 1) * iy; };
    auto y_edge = [n, offset](int ix, int ey) { return offset + ix + n * ey; };
    for (auto& e : impl->edges) {
      int slot = 0;
      for (int node : {e.lo, e.hi}) {
        if (node < 0) {
          slot += 2;
          continue;
        }
        const int ix = node % n;
        const int iy = node / n;
        if (e.axis == 0) {
          e.cross[slot++] = y_edge(ix, iy);
          e.cross[slot++] = y_edge(ix, iy + 1);
        } else {
          e.cross[slot++] = x_edge(ix, iy);
          e.cross[slot++] = x_edge(ix + 1, iy);
        }
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (int id = 0; id < static_cast<int>(impl->edges.size()); ++id) {
    const auto& e = impl->edges[id];
    if (e.hi >= 0)
      triplets.emplace_back(id, e.hi, 1.0 / h);
    if (e.lo >= 0)
      triplets.emplace_back(id, e.lo, -1.0 / h);
  }
  impl->gradient.resize(static_cast<long>(impl->edges.size()), impl->node_count);
  impl->gradient.setFromTriplets(triplets.begin(), triplets.end());

  SparseMat gtg = impl->gradient.transpose() * impl->gradient;
  impl->laplacian.compute(gtg);
  if (impl->laplacian.info() != Eigen::Success)
    throw Error("grid Laplacian factorization failed");

  impl_ = std::move(impl);
}

Point Grid::node(int k) const
{
  const int n = impl_->n;
  if (impl_->dim == 1)
    return {(k + 1) * impl_->h, 0.0};
  return {(k % n + 1) * impl_->h, (k / n + 1) * impl_->h};
}

Vec Grid::solve_laplacian(const Vec& y) const
{
  return impl_->laplacian.solve(y);
}

double Grid::cross_derivative(int e, const Vec& edge_values) const
{
  if (impl_->dim == 1)
    return 0.0;
  double sum = 0.0;
  for (int c : impl_->edges[e].cross)
    if (c >= 0)
      sum += edge_values[c];
  return 0.25 * sum;
}

} // namespace compsolve
