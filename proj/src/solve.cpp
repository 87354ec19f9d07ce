#include "compsolve/solve.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace compsolve {

namespace {

constexpr int kDivergenceWindows = 3;

/// Consecutive-window growth test |y_m| > |y_{m - m0}|.
class DivergenceMonitor
{
public:
  explicit DivergenceMonitor(int m0) : m0_(std::max(1, m0)) {}

  bool push(double res)
  {
    history_.push_back(res);
    const auto n = history_.size();
    if (n <= static_cast<size_t>(m0_))
      return false;
    if (history_[n - 1] > history_[n - 1 - m0_])
      ++streak_;
    else
      streak_ = 0;
    return streak_ >= kDivergenceWindows;
  }

private:
  int m0_;
  int streak_ = 0;
  std::vector<double> history_;
};

double effective_radius(const Mapping& f, const Vec& x_start)
{
  return f.ball().radius - f.domain().norm(x_start - f.ball().center);
}

SolveTrace start_trace(const Vec& x_start, double y_hat_norm, bool keep)
{
  SolveTrace trace;
  trace.x = x_start;
  trace.y_hat_norm = y_hat_norm;
  trace.residual = y_hat_norm;
  trace.iterates.push_back({0, y_hat_norm, 0.0, 0.0, 0.0});
  if (keep)
    trace.xs.push_back(x_start);
  return trace;
}

} // namespace

void SolveConfig::validate() const
{
  if (!(tol > 0.0))
    throw ConfigError(fmt::format("solver tolerance must be positive, got {}", tol));
  if (max_iter < 1)
    throw ConfigError(fmt::format("max_iter must be at least 1, got {}", max_iter));
  if (sigma_hint && !(*sigma_hint >= 0.0))
    throw ConfigError("sigma_hint must be nonnegative");
  if (m0_hint && *m0_hint < 1)
    throw ConfigError("m0_hint must be at least 1");
  sampler.validate();
}

std::string_view to_string(Outcome o)
{
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::NonContractive: return "NonContractive";
    case Outcome::LeftBall: return "LeftBall";
    case Outcome::MaxIter: return "MaxIter";
    case Outcome::SurrogateFailure: return "SurrogateFailure";
    case Outcome::PatchStall: return "PatchStall";
  }
  return "Unknown";
}

double SolveTrace::max_telescoping_defect() const
{
  double worst = 0.0;
  for (const auto& r : iterates)
    worst = std::max(worst, r.telescoping_defect);
  return worst;
}

SolveTrace solve_comparison(const Decomposition& d, const Vec& y_target, const Vec& x_start,
                            const SolveConfig& cfg)
{
  cfg.validate();
  const auto& X = d.f.domain();
  const auto& Y = d.f.codomain();
  Y.check(y_target);
  const Vec f_start = d.f(x_start);
  const Vec y_hat = y_target - f_start;
  const double y_hat_norm = Y.norm(y_hat);

  int m0 = cfg.m0_hint.value_or(1);
  if (cfg.radius_guard) {
    double r1 = 0.0;
    const double r_eff = effective_radius(d.f, x_start);
    if (cfg.sigma_hint) {
      if (!(*cfg.sigma_hint < 1.0)) {
        SolveTrace trace = start_trace(x_start, y_hat_norm, cfg.keep_iterates);
        trace.outcome = Outcome::NonContractive;
        trace.detail = fmt::format("sigma hint {} is not below 1", *cfg.sigma_hint);
        return trace;
      }
      r1 = 0.99 * (1.0 - *cfg.sigma_hint) * r_eff;
    } else {
      const auto c = estimate_contraction(d, cfg.sampler);
      if (!c.contraction) {
        SolveTrace trace = start_trace(x_start, y_hat_norm, cfg.keep_iterates);
        trace.outcome = Outcome::NonContractive;
        trace.detail = fmt::format("no m0 <= {} with sup k^m0(tau)/tau < 1 over {} sampled pairs",
                                   cfg.sampler.m_max, c.total_pairs - c.degenerate_pairs);
        return trace;
      }
      m0 = cfg.m0_hint.value_or(c.contraction->m0);
      const double image = estimate_image_radius(d, cfg.sampler);
      r1 = 0.99 * (1.0 - c.contraction->sigma) * std::min(r_eff, image) / c.block_growth;
    }
    if (y_hat_norm > r1)
      throw TargetOutsideCertifiedRadius(
        fmt::format("|y - f(x_start)| = {:.6g} exceeds the certified radius {:.6g}", y_hat_norm, r1));
  }

  SolveTrace trace = start_trace(x_start, y_hat_norm, cfg.keep_iterates);
  if (y_hat_norm <= cfg.tol) {
    trace.outcome = Outcome::Converged;
    return trace;
  }

  DivergenceMonitor monitor(m0);
  monitor.push(y_hat_norm);
  Vec x = x_start;
  Vec fx = f_start;
  Vec f0x = d.f0->eval(x);
  Vec y_m = y_hat;
  for (int m = 1; m <= cfg.max_iter; ++m) {
    Vec x_next;
    try {
      x_next = d.f0->solve(f0x + y_m, x);
    } catch (const SurrogateSolveFailed& e) {
      trace.outcome = Outcome::SurrogateFailure;
      trace.failed_at = m;
      trace.detail = e.what();
      return trace;
    } catch (const SingularJacobian& e) {
      trace.outcome = Outcome::SurrogateFailure;
      trace.failed_at = m;
      trace.detail = e.what();
      return trace;
    }
    if (!d.f.contains(x_next)) {
      trace.outcome = Outcome::LeftBall;
      trace.x = x_next;
      trace.detail = fmt::format("iterate {} at distance {:.6g} from the center of a ball of radius {:.6g}", m,
                                 X.norm(x_next - d.f.ball().center), d.f.ball().radius);
      return trace;
    }
    const Vec fx_next = d.f(x_next);
    const Vec f0x_next = d.f0->eval(x_next);
    y_m -= fx_next - fx;

    const double res = Y.norm(y_m);
    const double defect = Y.norm((y_hat - y_m) - (fx_next - f_start));
    trace.iterates.push_back({m, res, Y.norm(f0x_next - f0x), X.norm(x_next - x), defect});
    x = x_next;
    fx = fx_next;
    f0x = f0x_next;
    trace.x = x;
    trace.residual = Y.norm(fx - y_target);
    if (cfg.keep_iterates)
      trace.xs.push_back(x);

    if (res <= cfg.tol) {
      trace.outcome = Outcome::Converged;
      return trace;
    }
    if (monitor.push(res)) {
      trace.outcome = Outcome::NonContractive;
      trace.detail = fmt::format("|y_m| grew over {} consecutive windows of length {} (|y_{}| = {:.6g})",
                                 kDivergenceWindows, m0, m, res);
      return trace;
    }
  }
  trace.outcome = Outcome::MaxIter;
  trace.detail = fmt::format("no convergence in {} iterations", cfg.max_iter);
  return trace;
}

SolveTrace solve_fixed_point(const Mapping& f1, const Vec& y, const Vec& x_start, const SolveConfig& cfg)
{
  const auto g = f1;
  Mapping f(
    f1.domain(), f1.codomain(), [g](const Vec& x) -> Vec { return x - g.eval_unchecked(x); }, f1.ball());
  return solve_comparison({f, identity_surrogate(f1.domain().dim())}, y, x_start, cfg);
}

SolveTrace solve_patched(const Mapping& f, const SurrogateFactory& factory, const Vec& y, const Vec& x_start,
                         const SolveConfig& cfg, double reanchor_radius)
{
  cfg.validate();
  const auto& X = f.domain();
  const auto& Y = f.codomain();
  Y.check(y);
  const double R = reanchor_radius > 0.0 ? reanchor_radius : 0.25 * f.ball().radius;

  Vec anchor = x_start;
  Vec x = x_start;
  Vec fx = f(x);
  const double initial = Y.norm(y - fx);
  SolveTrace trace = start_trace(x_start, initial, cfg.keep_iterates);
  if (initial <= cfg.tol) {
    trace.outcome = Outcome::Converged;
    return trace;
  }

  double residual_at_anchor = initial;
  int stalled = 0;
  int m = 0;
  while (m < cfg.max_iter) {
    SurrogatePtr f0;
    try {
      f0 = factory(anchor);
    } catch (const SingularJacobian& e) {
      trace.outcome = Outcome::SurrogateFailure;
      trace.failed_at = m + 1;
      trace.detail = e.what();
      return trace;
    }
    // each patch restarts the recurrence with its own shifted target
    const Vec patch_start_f = fx;
    const Vec y_hat = y - fx;
    Vec y_m = y_hat;
    Vec f0x = f0->eval(x);
    const int m0 = cfg.m0_hint.value_or(1);
    DivergenceMonitor monitor(m0);
    monitor.push(Y.norm(y_m));
    double best = Y.norm(y_m);
    int since_best = 0;
    bool reanchor = false;
    while (m < cfg.max_iter && !reanchor) {
      ++m;
      Vec x_next;
      try {
        x_next = f0->solve(f0x + y_m, x);
      } catch (const Error& e) {
        trace.outcome = Outcome::SurrogateFailure;
        trace.failed_at = m;
        trace.detail = e.what();
        return trace;
      }
      const double offset = X.norm(x_next - anchor);
      if (offset >= R) {
        x_next = anchor + (x_next - anchor) * (R / offset);
        reanchor = true;
      }
      if (!f.contains(x_next)) {
        trace.outcome = Outcome::LeftBall;
        trace.x = x_next;
        trace.detail = fmt::format("iterate {} left the ball of radius {:.6g}", m, f.ball().radius);
        return trace;
      }
      const Vec fx_next = f(x_next);
      const Vec f0x_next = f0->eval(x_next);
      y_m -= fx_next - fx;
      const double res = Y.norm(y_m);
      const double defect = Y.norm((y_hat - y_m) - (fx_next - patch_start_f));
      trace.iterates.push_back({m, res, Y.norm(f0x_next - f0x), X.norm(x_next - x), defect});
      x = x_next;
      fx = fx_next;
      f0x = f0x_next;
      trace.x = x;
      trace.residual = Y.norm(fx - y);
      if (cfg.keep_iterates)
        trace.xs.push_back(x);

      if (trace.residual <= cfg.tol || res <= cfg.tol) {
        trace.outcome = Outcome::Converged;
        return trace;
      }
      if (res < (1.0 - 1e-3) * best) {
        best = res;
        since_best = 0;
      } else {
        ++since_best;
      }
      // growth or a cycle inside the patch: the frozen surrogate has lost validity here
      if (!reanchor && (monitor.push(res) || since_best >= std::max(5, 3 * m0)))
        reanchor = true;
    }
    if (!reanchor)
      break;

    anchor = x;
    ++trace.reanchors;
    if (trace.residual > (1.0 - 1e-3) * residual_at_anchor)
      ++stalled;
    else
      stalled = 0;
    residual_at_anchor = trace.residual;
    if (stalled >= 2) {
      trace.outcome = Outcome::PatchStall;
      trace.detail = fmt::format("two consecutive re-anchors without residual decrease (residual {:.6g})",
                                 trace.residual);
      return trace;
    }
  }
  trace.outcome = Outcome::MaxIter;
  trace.detail = fmt::format("no convergence in {} iterations over {} patches", cfg.max_iter, trace.reanchors + 1);
  return trace;
}

} // namespace compsolve
