#pragma once

#include "compsolve/certify.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace compsolve {

struct SolveConfig
{
  double tol = 1e-10;       ///< target for |y_m| in the codomain norm
  int max_iter = 200;
  bool radius_guard = false;
  std::optional<double> sigma_hint;
  std::optional<int> m0_hint;
  SamplerConfig sampler;    ///< used when the guard has to estimate (sigma, m0)
  bool keep_iterates = false;

  void validate() const;
};

enum class Outcome
{
  Converged,
  NonContractive,
  LeftBall,
  MaxIter,
  SurrogateFailure,
  PatchStall
};

std::string_view to_string(Outcome o);

struct IterationRecord
{
  int m;
  double res_norm;          ///< |y_m|
  double df0_norm;          ///< |f0(x_m) - f0(x_{m-1})|
  double step_norm;         ///< |x_m - x_{m-1}|
  double telescoping_defect; ///< |(y_hat - y_m) - (f(x_m) - f(x_start))|
};

struct SolveTrace
{
  std::vector<IterationRecord> iterates; ///< starts with the m = 0 row
  Outcome outcome = Outcome::MaxIter;
  Vec x;                    ///< last accepted iterate (the witness for LeftBall)
  double residual = 0.0;    ///< |f(x) - y_target| at the last evaluated iterate
  double y_hat_norm = 0.0;
  int failed_at = -1;       ///< iteration index for SurrogateFailure
  int reanchors = 0;
  std::string detail;
  std::vector<Vec> xs;      ///< all iterates when keep_iterates is set

  bool converged() const { return outcome == Outcome::Converged; }
  int iterations() const { return iterates.empty() ? 0 : iterates.back().m; }
  double max_telescoping_defect() const;
};

/// Successive approximation f0(x_m) = f0(x_{m-1}) + y_{m-1}, y_m = y_{m-1} - (f(x_m) - f(x_{m-1})),
/// started from y_0 = y_target - f(x_start). Throws TargetOutsideCertifiedRadius when the radius
/// guard rejects the target.
SolveTrace solve_comparison(const Decomposition& d, const Vec& y_target, const Vec& x_start,
                            const SolveConfig& cfg);

/// Solves x - f1(x) = y with f0 = identity; y = 0 gives a fixed point of f1.
SolveTrace solve_fixed_point(const Mapping& f1, const Vec& y, const Vec& x_start, const SolveConfig& cfg);

using SurrogateFactory = std::function<SurrogatePtr(const Vec& anchor)>;

/// The recurrence restricted to patches B_R(anchor); an iterate reaching the patch boundary
/// becomes the next anchor with a fresh surrogate. R <= 0 selects a quarter of f's ball radius.
SolveTrace solve_patched(const Mapping& f, const SurrogateFactory& factory, const Vec& y,
                         const Vec& x_start, const SolveConfig& cfg, double reanchor_radius = 0.0);

} // namespace compsolve
