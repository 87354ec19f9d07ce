#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <vector>

namespace compsolve {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SparseMat = Eigen::SparseMatrix<double>;
using Point = std::array<double, 2>;

/// Uniform grid on the unit interval or unit square with homogeneous
/// Dirichlet boundary. Unknowns live on the n^dim interior nodes; the
/// forward-difference gradient lives on edges (boundary values are zero).
class Grid
{
public:
  struct Edge
  {
    int axis;
    int lo; ///< interior node index, or -1 when the endpoint is on the boundary
    int hi;
    Point midpoint;
    std::array<int, 4> cross; ///< edges of the other axis averaged for the cross derivative (-1: zero)
  };

  Grid(int dim, int n);

  int dim() const { return impl_->dim; }
  int n() const { return impl_->n; }
  double h() const { return impl_->h; }
  /// h^dim, the weight of one node in discrete integrals.
  double cell_volume() const { return impl_->cell_volume; }
  int node_count() const { return impl_->node_count; }
  int edge_count() const { return static_cast<int>(impl_->edges.size()); }

  Point node(int k) const;
  const Edge& edge(int e) const { return impl_->edges[e]; }
  const std::vector<Edge>& edges() const { return impl_->edges; }

  /// Forward-difference gradient, edge_count() x node_count(), entries +-1/h.
  const SparseMat& gradient() const { return impl_->gradient; }

  /// Solves (G^T G) z = y.
  Vec solve_laplacian(const Vec& y) const;

  /// Average of the cross-axis differences adjacent to edge e.
  double cross_derivative(int e, const Vec& edge_values) const;

  bool operator==(const Grid& other) const { return dim() == other.dim() && n() == other.n(); }

private:
  struct Impl
  {
    int dim;
    int n;
    double h;
    double cell_volume;
    int node_count;
    std::vector<Edge> edges;
    SparseMat gradient;
    Eigen::SimplicialLDLT<SparseMat> laplacian;
  };
  std::shared_ptr<const Impl> impl_;
};

} // namespace compsolve
