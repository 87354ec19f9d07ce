#pragma once

#include "compsolve/solve.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace compsolve {

/// Divergence-free velocity modes u_k = (d_y psi_k, -d_x psi_k) on the unit square with
/// psi_k(x, y) = w_i(x) w_j(y), w_i(t) = t^2 (1 - t)^2 P_{i-1}(2t - 1).
class StreamFunctionBasis
{
public:
  struct Sample
  {
    double u[2];
    double grad[2][2]; ///< grad[i][j] = d_j u_i
  };

  /// First `count` modes ordered by i + j, then i. order <= 0 selects 2 max(i, j) + 4 points per axis.
  explicit StreamFunctionBasis(int count, int order = 0);

  int size() const { return static_cast<int>(modes_.size()); }
  const std::vector<std::pair<int, int>>& modes() const { return modes_; }
  int order() const { return order_; }
  int max_index() const;

  /// Velocity and gradient of mode k at (x, y), evaluated analytically.
  Sample eval(int k, double x, double y) const;

  int node_count() const { return static_cast<int>(weights_.size()); }
  double weight(int q) const { return weights_[q]; }
  const Sample& at(int k, int q) const { return table_[static_cast<size_t>(q) * modes_.size() + k]; }

private:
  std::vector<std::pair<int, int>> modes_;
  int order_;
  std::vector<double> weights_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<Sample> table_; ///< node-major
};

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int points);

struct NSConfig
{
  double nu = 1.0;
  double delta = 1.0 / 6.0;
  double mu_cond11 = 0.0;
  ScalarFunction phi = ScalarFunction::constant_value(0.0);
  int modes = 4;
  int quadrature_order = 0;
  double radius = 10.0;       ///< ball radius in the V norm
  Vec forcing;                ///< load vector <h, u_k>; empty means zero
  std::optional<double> alt_route_delta; ///< accept the monotone-phi route with this delta

  void validate() const;
};

/// Galerkin system f(c)_k = nu <grad u, grad u_k> + <2 phi(s(u)) B u, B u_k> + <(u . grad) u, u_k>.
class NavierStokesOperator
{
public:
  explicit NavierStokesOperator(const NSConfig& cfg);

  const NSConfig& config() const { return cfg_; }
  const StreamFunctionBasis& basis() const { return basis_; }
  int size() const { return basis_.size(); }

  /// <grad u_a, grad u_b>; the Gram matrix of the V norm.
  const Mat& stiffness() const { return stiffness_; }
  /// <u_a, u_b>
  const Mat& mass() const { return mass_; }

  Vec eval(const Vec& c) const;
  Vec stokes(const Vec& c) const { return cfg_.nu * (stiffness_ * c); }
  Vec strain_term(const Vec& c) const;
  Vec convection(const Vec& c) const;

  /// phi(s(u)) at every quadrature node.
  std::vector<double> phi_at_nodes(const Vec& c) const;
  /// max over quadrature nodes of s(u) = |B u|.
  double max_strain(const Vec& c) const;
  double l4_norm(const Vec& c) const;
  double v_norm(const Vec& c) const;
  double v_dual_norm(const Vec& y) const;

  /// Load vector <F, u_k> of a body force F(x, y).
  Vec project(const std::function<std::array<double, 2>(double, double)>& force) const;

  Space space() const { return space_; }

private:
  void assemble(const StreamFunctionBasis& basis, Mat& stiffness, Mat& mass, std::vector<Mat>& conv) const;

  NSConfig cfg_;
  StreamFunctionBasis basis_;
  Mat stiffness_;
  Mat mass_;
  std::vector<Mat> convection_; ///< convection_[k](a, b) = <(u_a . grad) u_b, u_k>
  Space space_;
};

using NSOperatorPtr = std::shared_ptr<const NavierStokesOperator>;

/// f as above with f0 the Stokes part nu S c. Throws QuadratureUnderResolved when raising the
/// rule by 2 points moves an assembled entry by more than 1e-8 relative.
Decomposition build_ns_operator(const NSConfig& cfg, NSOperatorPtr* op_out = nullptr);

struct NSCheck
{
  std::string name;
  bool pass = true;
  double worst = 0.0;   ///< smallest slack seen (negative on failure)
  std::string witness;
};

struct NSConditionReport
{
  std::vector<NSCheck> checks;       ///< (a) sup phi, (b) condition 11 grid, (c) energy, (d) stability
  std::optional<NSCheck> alt_route;  ///< nonnegative bounded phi with monotone strain term
  bool all_pass() const;
};

NSConditionReport verify_ns_conditions(const NSConfig& cfg, int samples, std::uint64_t seed = 0);

SolveTrace solve_ns_steady(const Decomposition& d, const Vec& rhs, const SolveConfig& cfg,
                           const Vec& start = Vec());

struct EvolveResult
{
  std::vector<SolveTrace> steps;
  std::vector<Vec> states;              ///< u^0 = 0, u^1, ...
  std::vector<double> energy_slack;     ///< right minus left side of the discrete energy inequality
  bool energy_ok = true;
  std::optional<int> rejected_step;
  std::string detail;
};

using TimeForcing = std::function<Vec(double t)>;

/// Implicit Euler (u^{n+1} - u^n)/dt + f(u^{n+1}) = h(t_{n+1}) from u^0 = 0, each step solved
/// by the comparison recurrence with surrogate M/dt + nu S. A failed step ends the run with
/// rejected_step set; throw_on_reject raises StepRejected instead.
EvolveResult evolve_ns(const NSOperatorPtr& op, const TimeForcing& h, double T, double dt, const SolveConfig& cfg,
                       bool throw_on_reject = false);

} // namespace compsolve
