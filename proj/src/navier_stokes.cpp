#include "compsolve/navier_stokes.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace compsolve {

namespace {

struct Profile
{
  double w, dw, ddw;
};

/// w_i(t) = t^2 (1 - t)^2 P_{i-1}(2t - 1) and its first two derivatives.
Profile profile(int i, double t)
{
  const double z = 2.0 * t - 1.0;
  // P_k, P_k', P_k'' in z by the three-term recurrence
  double p0 = 1.0, d0 = 0.0, s0 = 0.0;
  double p1 = z, d1 = 1.0, s1 = 0.0;
  double p = p0, dp = d0, sp = s0;
  const int k = i - 1;
  if (k == 1) {
    p = p1;
    dp = d1;
    sp = s1;
  }
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2 * n + 1) * z * p1 - n * p0) / (n + 1);
    const double d2 = d0 + (2 * n + 1) * p1;
    const double s2 = s0 + (2 * n + 1) * d1;
    p0 = p1, d0 = d1, s0 = s1;
    p1 = p2, d1 = d2, s1 = s2;
    p = p2, dp = d2, sp = s2;
  }
  const double q = t * t * (1 - t) * (1 - t);
  const double dq = 2.0 * t * (1 - t) * (1 - 2.0 * t);
  const double ddq = 2.0 * (1.0 - 6.0 * t + 6.0 * t * t);
  // d/dt = 2 d/dz
  return {q * p, dq * p + 2.0 * q * dp, ddq * p + 4.0 * dq * dp + 4.0 * q * sp};
}

struct Strain
{
  double b11, b12, b22;

  double dot(const Strain& o) const { return b11 * o.b11 + 2.0 * b12 * o.b12 + b22 * o.b22; }
  double magnitude() const { return std::sqrt(dot(*this)); }
};

Strain strain_of(const StreamFunctionBasis::Sample& s)
{
  return {s.grad[0][0], 0.5 * (s.grad[0][1] + s.grad[1][0]), s.grad[1][1]};
}

StreamFunctionBasis::Sample combine(const StreamFunctionBasis& basis, const Vec& c, int q)
{
  StreamFunctionBasis::Sample out{};
  for (int k = 0; k < basis.size(); ++k) {
    const auto& s = basis.at(k, q);
    for (int i = 0; i < 2; ++i) {
      out.u[i] += c[k] * s.u[i];
      for (int j = 0; j < 2; ++j)
        out.grad[i][j] += c[k] * s.grad[i][j];
    }
  }
  return out;
}

double relative_change(const Mat& a, const Mat& b)
{
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Vec random_direction_v(const NavierStokesOperator& op, std::mt19937_64& rng)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vec c(op.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
      c[i] = gauss(rng);
    const double n = op.v_norm(c);
    if (n > 0.0)
      return c / n;
  }
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int points)
{
  if (points < 1)
    throw ConfigError("Gauss rule needs at least one point");
  std::vector<double> x(points), w(points);
  for (int i = 0; i < points; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int n = 1; n < points; ++n) {
        const double p2 = ((2 * n + 1) * z * p1 - n * p0) / (n + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = points * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    x[points - 1 - i] = 0.5 * (z + 1.0);
    w[points - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

StreamFunctionBasis::StreamFunctionBasis(int count, int order)
{
  if (count < 1)
    throw ConfigError("basis needs at least one mode");
  for (int s = 2; static_cast<int>(modes_.size()) < count; ++s)
    for (int i = 1; i < s && static_cast<int>(modes_.size()) < count; ++i)
      modes_.emplace_back(i, s - i);
  order_ = order > 0 ? order : 2 * max_index() + 4;

  const auto [x, w] = gauss_legendre(order_);
  for (int a = 0; a < order_; ++a)
    for (int b = 0; b < order_; ++b) {
      nodes_.push_back({x[a], x[b]});
      weights_.push_back(w[a] * w[b]);
    }
  table_.reserve(nodes_.size() * modes_.size());
  for (const auto& node : nodes_)
    for (int k = 0; k < size(); ++k)
      table_.push_back(eval(k, node[0], node[1]));
}

int StreamFunctionBasis::max_index() const
{
  int m = 1;
  for (const auto& [i, j] : modes_)
    m = std::max({m, i, j});
  return m;
}

StreamFunctionBasis::Sample StreamFunctionBasis::eval(int k, double x, double y) const
{
  const auto [i, j] = modes_.at(k);
  const Profile px = profile(i, x);
  const Profile py = profile(j, y);
  Sample s{};
  s.u[0] = px.w * py.dw;
  s.u[1] = -px.dw * py.w;
  s.grad[0][0] = px.dw * py.dw;
  s.grad[0][1] = px.w * py.ddw;
  s.grad[1][0] = -px.ddw * py.w;
  s.grad[1][1] = -px.dw * py.dw;
  return s;
}

void NSConfig::validate() const
{
  if (!(nu > 0.0))
    throw ConfigError(fmt::format("viscosity must be positive, got {}", nu));
  if (!(delta > 0.0) && !alt_route_delta)
    throw ConfigError(fmt::format("delta must be positive, got {}", delta));
  if (modes < 1)
    throw ConfigError("at least one mode is required");
  if (!(radius > 0.0))
    throw ConfigError("ball radius must be positive");
  if (!phi.eval)
    throw ConfigError("phi is not set");
  if (forcing.size() != 0 && forcing.size() != modes)
    throw DimensionMismatch(modes, forcing.size());
}

NavierStokesOperator::NavierStokesOperator(const NSConfig& cfg)
  : cfg_(cfg), basis_((cfg.validate(), cfg.modes), cfg.quadrature_order), space_(Space::lp(1, 2.0))
{
  assemble(basis_, stiffness_, mass_, convection_);

  StreamFunctionBasis finer(cfg_.modes, basis_.order() + 2);
  Mat s2, m2;
  std::vector<Mat> c2;
  assemble(finer, s2, m2, c2);
  double worst = std::max(relative_change(stiffness_, s2), relative_change(mass_, m2));
  double conv_scale = 0.0, conv_diff = 0.0;
  for (size_t k = 0; k < c2.size(); ++k) {
    conv_scale = std::max(conv_scale, c2[k].cwiseAbs().maxCoeff());
    conv_diff = std::max(conv_diff, (convection_[k] - c2[k]).cwiseAbs().maxCoeff());
  }
  // entries that vanish by skew symmetry are measured against the stiffness scale
  const double floor = 1e-8 * stiffness_.cwiseAbs().maxCoeff();
  worst = std::max(worst, conv_diff / std::max(conv_scale, floor));
  if (worst > 1e-8)
    throw QuadratureUnderResolved(fmt::format(
      "{}-point rule moves assembled entries by {:.3g} relative against {} points", basis_.order(), worst,
      finer.order()));

  space_ = Space::energy(stiffness_, "V");
}

void NavierStokesOperator::assemble(const StreamFunctionBasis& basis, Mat& stiffness, Mat& mass,
                                    std::vector<Mat>& conv) const
{
  const int n = basis.size();
  stiffness = Mat::Zero(n, n);
  mass = Mat::Zero(n, n);
  conv.assign(n, Mat::Zero(n, n));
  for (int q = 0; q < basis.node_count(); ++q) {
    const double w = basis.weight(q);
    for (int a = 0; a < n; ++a) {
      const auto& sa = basis.at(a, q);
      for (int b = 0; b < n; ++b) {
        const auto& sb = basis.at(b, q);
        double g = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            g += sa.grad[i][j] * sb.grad[i][j];
        stiffness(a, b) += w * g;
        mass(a, b) += w * (sa.u[0] * sb.u[0] + sa.u[1] * sb.u[1]);
        // (u_a . grad) u_b
        const double t0 = sa.u[0] * sb.grad[0][0] + sa.u[1] * sb.grad[0][1];
        const double t1 = sa.u[0] * sb.grad[1][0] + sa.u[1] * sb.grad[1][1];
        for (int k = 0; k < n; ++k) {
          const auto& sk = basis.at(k, q);
          conv[k](a, b) += w * (t0 * sk.u[0] + t1 * sk.u[1]);
        }
      }
    }
  }
  stiffness = 0.5 * (stiffness + stiffness.transpose());
  mass = 0.5 * (mass + mass.transpose());
}

Vec NavierStokesOperator::strain_term(const Vec& c) const
{
  Vec out = Vec::Zero(size());
  for (int q = 0; q < basis_.node_count(); ++q) {
    const Strain b = strain_of(combine(basis_, c, q));
    const double coef = 2.0 * cfg_.phi(b.magnitude()) * basis_.weight(q);
    if (coef == 0.0)
      continue;
    for (int k = 0; k < size(); ++k)
      out[k] += coef * b.dot(strain_of(basis_.at(k, q)));
  }
  return out;
}

Vec NavierStokesOperator::convection(const Vec& c) const
{
  Vec out(size());
  for (int k = 0; k < size(); ++k)
    out[k] = c.dot(convection_[k] * c);
  return out;
}

Vec NavierStokesOperator::eval(const Vec& c) const
{
  return stokes(c) + strain_term(c) + convection(c);
}

std::vector<double> NavierStokesOperator::phi_at_nodes(const Vec& c) const
{
  std::vector<double> out(basis_.node_count());
  for (int q = 0; q < basis_.node_count(); ++q)
    out[q] = cfg_.phi(strain_of(combine(basis_, c, q)).magnitude());
  return out;
}

double NavierStokesOperator::max_strain(const Vec& c) const
{
  double m = 0.0;
  for (int q = 0; q < basis_.node_count(); ++q)
    m = std::max(m, strain_of(combine(basis_, c, q)).magnitude());
  return m;
}

double NavierStokesOperator::l4_norm(const Vec& c) const
{
  double sum = 0.0;
  for (int q = 0; q < basis_.node_count(); ++q) {
    const auto s = combine(basis_, c, q);
    const double m2 = s.u[0] * s.u[0] + s.u[1] * s.u[1];
    sum += basis_.weight(q) * m2 * m2;
  }
  return std::pow(sum, 0.25);
}

double NavierStokesOperator::v_norm(const Vec& c) const
{
  return std::sqrt(std::max(c.dot(stiffness_ * c), 0.0));
}

double NavierStokesOperator::v_dual_norm(const Vec& y) const
{
  return space_.dual().norm(y);
}

Vec NavierStokesOperator::project(const std::function<std::array<double, 2>(double, double)>& force) const
{
  Vec out = Vec::Zero(size());
  StreamFunctionBasis fine(cfg_.modes, basis_.order() + 4);
  const auto [x, w] = gauss_legendre(fine.order());
  int q = 0;
  for (size_t a = 0; a < x.size(); ++a)
    for (size_t b = 0; b < x.size(); ++b, ++q) {
      const auto F = force(x[a], x[b]);
      for (int k = 0; k < size(); ++k) {
        const auto& s = fine.at(k, q);
        out[k] += fine.weight(q) * (F[0] * s.u[0] + F[1] * s.u[1]);
      }
    }
  return out;
}

Decomposition build_ns_operator(const NSConfig& cfg, NSOperatorPtr* op_out)
{
  auto op = std::make_shared<const NavierStokesOperator>(cfg);
  if (op_out)
    *op_out = op;
  const Space X = op->space();
  Mapping f(X, X.dual(), [op](const Vec& c) { return op->eval(c); }, {Vec::Zero(op->size()), cfg.radius});
  return {f, linear_surrogate(cfg.nu * op->stiffness())};
}

bool NSConditionReport::all_pass() const
{
  auto passed = [this](size_t i) { return i < checks.size() && checks[i].pass; };
  const bool structural = passed(2) && passed(3);
  const bool phi_route = passed(0) && passed(1);
  return structural && (phi_route || (alt_route && alt_route->pass));
}

NSConditionReport verify_ns_conditions(const NSConfig& cfg, int samples, std::uint64_t seed)
{
  if (samples < 1)
    throw ConfigError("verify_ns_conditions needs at least one sample");
  const NavierStokesOperator op(cfg);
  std::mt19937_64 rng(seed ^ 0xa5a5f00dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Vec> us;
  us.reserve(samples);
  for (int s = 0; s < samples; ++s)
    us.push_back(cfg.radius * unit(rng) * random_direction_v(op, rng));

  NSConditionReport report;
  const double bound = cfg.nu / 3.0 - cfg.delta;

  // (a) sup |phi(s(u))| at quadrature nodes
  NSCheck a{"(a) |phi(s(u))|_inf <= nu/3 - delta", true, std::numeric_limits<double>::infinity(), ""};
  double s_max = 0.0;
  for (int i = 0; i < samples; ++i) {
    s_max = std::max(s_max, op.max_strain(us[i]));
    for (double v : op.phi_at_nodes(us[i])) {
      const double slack = bound - std::abs(v);
      if (slack < a.worst) {
        a.worst = slack;
        a.witness = fmt::format("sample {}: phi = {:.6g} against bound {:.6g}", i, v, bound);
      }
    }
  }
  a.pass = a.worst >= -1e-14 * (1.0 + std::abs(bound)) && bound > 0.0;
  if (bound <= 0.0)
    a.witness = fmt::format("nu/3 - delta = {:.6g} is not positive", bound);
  report.checks.push_back(a);

  // (b) |phi(t) - phi(tau)| |t| <= |mu + phi(t)| |t - tau| on a symmetric grid
  NSCheck b{"(b) condition 11 on a (t, tau) grid", true, std::numeric_limits<double>::infinity(), ""};
  const double T = std::max(1.0, 2.0 * s_max);
  const int grid = 201;
  for (int i = 0; i < grid; ++i) {
    const double t = -T + 2.0 * T * i / (grid - 1);
    const double pt = cfg.phi(t);
    for (int j = 0; j < grid; ++j) {
      const double tau = -T + 2.0 * T * j / (grid - 1);
      const double lhs = std::abs(pt - cfg.phi(tau)) * std::abs(t);
      const double rhs = std::abs(cfg.mu_cond11 + pt) * std::abs(t - tau);
      const double slack = rhs - lhs;
      if (slack < b.worst) {
        b.worst = slack;
        b.witness = fmt::format("t = {:.6g}, tau = {:.6g}", t, tau);
      }
    }
  }
  b.pass = b.worst >= -1e-12 * (1.0 + T) && cfg.mu_cond11 >= 0.0 && cfg.mu_cond11 <= bound;
  if (cfg.mu_cond11 < 0.0 || cfg.mu_cond11 > bound)
    b.witness = fmt::format("mu = {} outside [0, nu/3 - delta]", cfg.mu_cond11);
  report.checks.push_back(b);

  // (c) <f(u), u> >= (2 nu / 3) |u|_V^2
  NSCheck c{"(c) <f(u), u> >= (2 nu/3) |u|_V^2", true, std::numeric_limits<double>::infinity(), ""};
  for (int i = 0; i < samples; ++i) {
    const Vec fu = op.eval(us[i]);
    const double lhs = fu.dot(us[i]);
    const double v2 = us[i].dot(op.stiffness() * us[i]);
    const double slack = lhs - (2.0 * cfg.nu / 3.0) * v2;
    const double tol = 1e-12 * (1.0 + std::abs(lhs) + v2);
    if (slack < c.worst) {
      c.worst = slack;
      c.witness = fmt::format("sample {}: <f(u),u> = {:.6g}, |u|_V^2 = {:.6g}", i, lhs, v2);
    }
    if (slack < -tol)
      c.pass = false;
  }
  report.checks.push_back(c);

  // (d) |f(u) - f(v)|_V* >= 3 delta |w|_V - (|u|_4 + |v|_4) |w|_4 / 2
  auto stability = [&](double delta, const std::string& name) {
    NSCheck d{name, true, std::numeric_limits<double>::infinity(), ""};
    for (int i = 0; i < std::max(1, samples / 2); ++i) {
      const Vec& u = us[2 * i];
      const Vec v = samples == 1 ? Vec(0.5 * u) : us[2 * i + 1];
      const Vec w = u - v;
      const double lhs = op.v_dual_norm(op.eval(u) - op.eval(v));
      const double rhs = 3.0 * delta * op.v_norm(w) - 0.5 * (op.l4_norm(u) + op.l4_norm(v)) * op.l4_norm(w);
      const double slack = lhs - rhs;
      if (slack < d.worst) {
        d.worst = slack;
        d.witness = fmt::format("pair {}: |f(u) - f(v)|_V* = {:.6g}, lower bound {:.6g}", i, lhs, rhs);
      }
      if (slack < -1e-12 * (1.0 + std::abs(lhs)))
        d.pass = false;
    }
    return d;
  };
  report.checks.push_back(stability(cfg.delta, "(d) stability lower bound"));

  if (cfg.alt_route_delta) {
    NSCheck alt{"alternative route: phi >= 0 bounded, strain term monotone", true,
                std::numeric_limits<double>::infinity(), ""};
    double phi_max = 0.0;
    for (int i = 0; i < samples; ++i)
      for (double v : op.phi_at_nodes(us[i])) {
        phi_max = std::max(phi_max, v);
        if (v < 0.0 || !std::isfinite(v)) {
          alt.pass = false;
          alt.witness = fmt::format("sample {}: phi = {:.6g}", i, v);
        }
      }
    for (int i = 0; i + 1 < samples; i += 2) {
      const Vec w = us[i] - us[i + 1];
      const double mono = (op.strain_term(us[i]) - op.strain_term(us[i + 1])).dot(w);
      if (mono < alt.worst)
        alt.worst = mono;
      if (mono < -1e-12 * (1.0 + w.squaredNorm())) {
        alt.pass = false;
        alt.witness = fmt::format("pair ({}, {}): monotonicity defect {:.6g}", i, i + 1, mono);
      }
    }
    const auto d_alt = stability(*cfg.alt_route_delta, "alt stability");
    if (!d_alt.pass) {
      alt.pass = false;
      alt.witness = d_alt.witness;
    }
    if (alt.pass)
      alt.witness = fmt::format("sup phi = {:.6g}", phi_max);
    report.alt_route = alt;
  }
  return report;
}

SolveTrace solve_ns_steady(const Decomposition& d, const Vec& rhs, const SolveConfig& cfg, const Vec& start)
{
  const Vec x0 = start.size() == 0 ? Vec::Zero(d.f.domain().dim()) : start;
  return solve_comparison(d, rhs, x0, cfg);
}

EvolveResult evolve_ns(const NSOperatorPtr& op, const TimeForcing& h, double T, double dt, const SolveConfig& cfg,
                       bool throw_on_reject)
{
  if (!(dt > 0.0))
    throw ConfigError(fmt::format("time step must be positive, got {}", dt));
  if (!(T > 0.0))
    throw ConfigError(fmt::format("horizon must be positive, got {}", T));
  const double ratio = T / dt;
  if (ratio > 1e4)
    throw ConfigError(fmt::format("T/dt = {} exceeds 10^4 steps", ratio));
  const int steps = static_cast<int>(std::llround(std::ceil(ratio - 1e-9)));

  const auto& nsc = op->config();
  const Space X = op->space();
  const Mat& M = op->mass();
  const Mat& S = op->stiffness();
  const Mapping step_map(
    X, X.dual(), [op, dt](const Vec& c) -> Vec { return op->mass() * c / dt + op->eval(c); },
    {Vec::Zero(op->size()), nsc.radius});
  const Decomposition d{step_map, linear_surrogate(Mat(M / dt + nsc.nu * S))};

  EvolveResult result;
  Vec u = Vec::Zero(op->size());
  result.states.push_back(u);
  for (int n = 0; n < steps; ++n) {
    const double t = (n + 1) * dt;
    const Vec hn = h(t);
    const Vec target = hn + M * u / dt;
    SolveTrace trace;
    try {
      trace = solve_comparison(d, target, u, cfg);
    } catch (const Error& e) {
      trace.outcome = Outcome::SurrogateFailure;
      trace.detail = e.what();
    }
    if (!trace.converged()) {
      result.rejected_step = n + 1;
      result.detail = fmt::format("step {} (t = {:.6g}): {} {}", n + 1, t, to_string(trace.outcome), trace.detail);
      result.steps.push_back(std::move(trace));
      if (throw_on_reject)
        throw StepRejected(result.detail);
      return result;
    }
    const Vec next = trace.x;
    const double lhs = 0.5 * next.dot(M * next) + dt * (2.0 * nsc.nu / 3.0) * next.dot(S * next);
    const double rhs = 0.5 * u.dot(M * u) + dt * hn.dot(next);
    // the accepted state solves the step with residual trace.residual in V*
    const double allowance = dt * trace.residual * op->v_norm(next) + 1e-12 * (1.0 + std::abs(rhs));
    result.energy_slack.push_back(rhs - lhs);
    if (rhs - lhs < -allowance)
      result.energy_ok = false;
    result.steps.push_back(std::move(trace));
    result.states.push_back(next);
    u = next;
  }
  return result;
}

} // namespace compsolve
