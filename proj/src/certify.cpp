#include "compsolve/certify.hpp"

#include "compsolve/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace compsolve {

namespace {

enum class Stream : std::uint32_t
{
  Sphere = 1,
  Pairs = 2,
};

/// Independent, reproducible stream per sample family so that estimators agree on
/// their samples regardless of call order.
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

Vec random_direction(const Space& space, std::mt19937_64& rng)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vec v(space.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = gauss(rng);
    const double n = space.norm(v);
    if (n > 0.0)
      return v / n;
  }
}

std::vector<Vec> sphere_directions(const Decomposition& d, const SamplerConfig& cfg)
{
  auto rng = make_rng(cfg.rng_seed, Stream::Sphere);
  std::vector<Vec> dirs;
  dirs.reserve(cfg.n_sphere);
  for (int i = 0; i < cfg.n_sphere; ++i)
    dirs.push_back(random_direction(d.f.domain(), rng));
  return dirs;
}

struct SphereSample
{
  int level;
  int direction;
  double t;
  double f_growth;   ///< |f(x) - f(x0)|
  double f0_growth;  ///< |f0(x) - f0(x0)|
  double pair_f;     ///< <f(x) - f(x0), x - x0>
  double pair_f0;    ///< <f0(x) - f0(x0), x - x0>
};

struct SphereScan
{
  std::vector<SphereSample> samples; ///< level-major
};

SphereScan sphere_scan(const Decomposition& d, const SamplerConfig& cfg)
{
  cfg.validate();
  const auto& X = d.f.domain();
  const auto& Y = d.f.codomain();
  const Vec& x0 = d.f.ball().center;
  const double r0 = d.f.ball().radius;
  const Vec fx0 = d.f(x0);
  const Vec f0x0 = d.f0->eval(x0);
  const auto dirs = sphere_directions(d, cfg);

  SphereScan scan;
  scan.samples.reserve(static_cast<size_t>(cfg.n_radii) * dirs.size());
  for (int level = 1; level <= cfg.n_radii; ++level) {
    const double t = r0 * level / cfg.n_radii;
    for (int i = 0; i < static_cast<int>(dirs.size()); ++i) {
      const Vec step = t * dirs[i];
      const Vec x = x0 + step;
      const Vec df = d.f(x) - fx0;
      const Vec df0 = d.f0->eval(x) - f0x0;
      scan.samples.push_back({level, i, t, Y.norm(df), Y.norm(df0), X.pair(df, step), X.pair(df0, step)});
    }
  }
  return scan;
}

struct PairSample
{
  double tau; ///< |f0(x1) - f0(x2)|
  double e;   ///< |f(x1) - f(x2) - f0(x1) + f0(x2)|
  double s;   ///< |f(x1) - f(x2)|
};

struct PairScan
{
  std::vector<PairSample> samples; ///< nondegenerate pairs only
  int degenerate = 0;
  int total = 0;
};

Vec point_in_ball(const Decomposition& d, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec dir = random_direction(d.f.domain(), rng);
  return d.f.ball().center + d.f.ball().radius * unit(rng) * dir;
}

PairScan pair_scan(const Decomposition& d, const SamplerConfig& cfg)
{
  cfg.validate();
  const auto& X = d.f.domain();
  const auto& Y = d.f.codomain();
  const Vec& x0 = d.f.ball().center;
  const double r0 = d.f.ball().radius;
  auto rng = make_rng(cfg.rng_seed, Stream::Pairs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PairScan scan;
  scan.total = cfg.n_pairs;
  for (int i = 0; i < cfg.n_pairs; ++i) {
    const Vec x1 = point_in_ball(d, rng);
    Vec x2;
    if (i % 2 == 0) {
      x2 = point_in_ball(d, rng);
    } else {
      // close pair: separation log-uniform in [1e-4, 1] r0, pulled back into the ball
      const double sep = r0 * std::pow(10.0, -4.0 * unit(rng));
      x2 = x1 + sep * random_direction(X, rng);
      const double dist = X.norm(x2 - x0);
      if (dist > r0)
        x2 = x0 + (x2 - x0) * (r0 / dist);
    }
    const Vec df = d.f(x1) - d.f(x2);
    const Vec df0 = d.f0->eval(x1) - d.f0->eval(x2);
    const double tau = Y.norm(df0);
    if (!(tau > 0.0)) {
      ++scan.degenerate;
      continue;
    }
    scan.samples.push_back({tau, Y.norm(df - df0), Y.norm(df)});
  }
  return scan;
}

EnvelopeTable growth_from(const SphereScan& scan, int levels)
{
  EnvelopeTable table(levels, {0.0, 0.0});
  for (const auto& s : scan.samples) {
    auto& row = table[s.level - 1];
    row.t = s.t;
    row.v = std::max(row.v, s.f_growth);
  }
  for (size_t j = 1; j < table.size(); ++j)
    table[j].v = std::max(table[j].v, table[j - 1].v);
  return table;
}

CoercivityEstimate coercivity_from(const SphereScan& scan, int levels)
{
  EnvelopeTable table(levels, {0.0, std::numeric_limits<double>::infinity()});
  for (const auto& s : scan.samples) {
    auto& row = table[s.level - 1];
    row.t = s.t;
    row.v = std::min(row.v, s.pair_f0 / s.t);
  }
  return {table, table.back().v};
}

struct ComparisonResult
{
  double k;
  bool defined;
  const SphereSample* witness;
};

ComparisonResult comparison_from(const SphereScan& scan)
{
  double k = std::numeric_limits<double>::infinity();
  for (const auto& s : scan.samples) {
    if (!(s.pair_f0 > 0.0))
      return {0.0, false, &s};
    k = std::min(k, s.pair_f / s.pair_f0);
  }
  return {k, true, nullptr};
}

ContractionEstimate contraction_from(const PairScan& scan, int m_max)
{
  ContractionEstimate out;
  out.degenerate_pairs = scan.degenerate;
  out.total_pairs = scan.total;
  if (scan.samples.empty())
    return out;

  std::vector<PairSample> sorted = scan.samples;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
  std::vector<double> taus(sorted.size());
  std::vector<double> envelope(sorted.size());
  double running = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    taus[i] = sorted[i].tau;
    running = std::max(running, sorted[i].e);
    envelope[i] = running;
  }
  const double tau_lo = taus.front();
  const double tau_hi = taus.back();
  // step envelope inside the sampled range, linear continuation outside it
  auto k_of = [&](double tau) {
    if (tau <= 0.0)
      return 0.0;
    if (tau < tau_lo)
      return envelope.front() * tau / tau_lo;
    if (tau > tau_hi)
      return std::max(envelope.back(), envelope.back() * tau / tau_hi);
    const auto it = std::upper_bound(taus.begin(), taus.end(), tau);
    return envelope[static_cast<size_t>(it - taus.begin()) - 1];
  };

  std::vector<double> iterate = taus;
  double growth = 1.0;
  for (int m = 1; m <= m_max; ++m) {
    double ratio = 0.0;
    for (size_t j = 0; j < iterate.size(); ++j) {
      iterate[j] = k_of(iterate[j]);
      ratio = std::max(ratio, iterate[j] / taus[j]);
    }
    out.sigma_by_m.push_back(ratio);
    if (ratio < 1.0) {
      out.contraction = Contraction{ratio, m};
      out.block_growth = growth;
      return out;
    }
    growth += ratio;
  }
  return out;
}

double image_radius_from(const SphereScan& scan, int levels)
{
  double r = std::numeric_limits<double>::infinity();
  for (const auto& s : scan.samples)
    if (s.level == levels)
      r = std::min(r, s.f0_growth);
  return r;
}

} // namespace

void SamplerConfig::validate() const
{
  if (n_sphere < 1 || n_radii < 1 || n_pairs < 1 || m_max < 1)
    throw ConfigError("sampler counts must all be at least 1");
}

std::string_view to_string(Verdict v)
{
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

EnvelopeTable estimate_growth_mu(const Decomposition& d, const SamplerConfig& cfg)
{
  return growth_from(sphere_scan(d, cfg), cfg.n_radii);
}

CoercivityEstimate estimate_coercivity_nu(const Decomposition& d, const SamplerConfig& cfg)
{
  return coercivity_from(sphere_scan(d, cfg), cfg.n_radii);
}

double estimate_comparison_k(const Decomposition& d, const SamplerConfig& cfg)
{
  const auto scan = sphere_scan(d, cfg);
  const auto result = comparison_from(scan);
  if (!result.defined)
    throw DegenerateDenominator(
      fmt::format("<f0(x) - f0(x0), x - x0> = {:.6g} <= 0 at radius {:.6g} (direction {})",
                  result.witness->pair_f0, result.witness->t, result.witness->direction));
  return result.k;
}

ContractionEstimate estimate_contraction(const Decomposition& d, const SamplerConfig& cfg)
{
  if (cfg.n_pairs < 2)
    throw ConfigError("contraction estimate needs at least 2 pairs");
  return contraction_from(pair_scan(d, cfg), cfg.m_max);
}

double estimate_local_stability_k1(const Decomposition& d, const SamplerConfig& cfg)
{
  const auto scan = pair_scan(d, cfg);
  if (scan.samples.empty())
    throw AllPairsDegenerate();
  double k1 = std::numeric_limits<double>::infinity();
  for (const auto& p : scan.samples)
    k1 = std::min(k1, p.s / p.tau);
  return k1;
}

double estimate_image_radius(const Decomposition& d, const SamplerConfig& cfg)
{
  SamplerConfig top = cfg;
  top.n_radii = 1;
  return image_radius_from(sphere_scan(d, top), 1);
}

double certified_radius(const Decomposition& d, const ContractionEstimate& c, double image_radius)
{
  if (!c.contraction)
    return 0.0;
  const double r = std::min(d.f.ball().radius, image_radius);
  return 0.99 * (1.0 - c.contraction->sigma) * r / c.block_growth;
}

Membership solvable_set_membership(const Decomposition& d, const Vec& y, const SamplerConfig& cfg)
{
  cfg.validate();
  const auto& X = d.f.domain();
  d.f.codomain().check(y);
  const Vec& x0 = d.f.ball().center;
  const double r0 = d.f.ball().radius;
  const Vec fx0 = d.f(x0);
  const Vec shifted = y - fx0;

  double margin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  Vec witness;
  for (const auto& dir : sphere_directions(d, cfg)) {
    const Vec step = r0 * dir;
    const Vec x = x0 + step;
    const double lhs = X.pair(shifted, step);
    const double rhs = X.pair(d.f(x) - fx0, step);
    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
    if (rhs - lhs < margin) {
      margin = rhs - lhs;
      witness = x;
    }
  }
  const double noise = 1e-12 * (1.0 + scale);
  if (margin < -noise)
    return NonMember{witness, margin};
  if (margin <= noise)
    return Inconclusive{fmt::format("slack {:.3g} within rounding of the sphere test", margin)};
  return Member{margin};
}

CertificateReport certify(const Decomposition& d, const SamplerConfig& cfg)
{
  const auto sphere = sphere_scan(d, cfg);
  const auto pairs = pair_scan(d, cfg);

  CertificateReport report;
  report.seed = cfg.rng_seed;
  report.mu = growth_from(sphere, cfg.n_radii);
  auto coercivity = coercivity_from(sphere, cfg.n_radii);
  report.nu = std::move(coercivity.nu);
  report.delta0 = coercivity.delta0;
  report.image_radius = image_radius_from(sphere, cfg.n_radii);

  report.gaps = {
    "interior mapping: openness of f0 checked only through solvability of sampled surrogate solves",
    fmt::format("coercivity nu and delta0 sampled on {} directions x {} radii", cfg.n_sphere, cfg.n_radii),
    "comparison constant k is a sampled infimum over the sphere levels",
    fmt::format("perturbation envelope k(tau) and (sigma, m0) fitted on {} sampled pairs", cfg.n_pairs),
    "local stability k1 is a sampled infimum; the almost-every neighborhood quantifier is not checked",
    "compact-embedding correction terms are not estimated",
  };

  const auto comparison = comparison_from(sphere);
  report.k = comparison.k;
  if (!comparison.defined) {
    report.k = 0.0;
    report.gaps.push_back(
      fmt::format("comparison constant undefined: <f0(x) - f0(x0), x - x0> = {:.6g} <= 0 at radius {:.6g}",
                  comparison.witness->pair_f0, comparison.witness->t));
  }

  const auto contraction = contraction_from(pairs, cfg.m_max);
  report.contraction = contraction.contraction;
  report.degenerate_pairs = pairs.degenerate;
  report.total_pairs = pairs.total;

  if (pairs.samples.empty()) {
    report.k1 = 0.0;
    report.gaps.push_back("local stability undefined: every sampled pair was degenerate");
  } else {
    double k1 = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs.samples)
      k1 = std::min(k1, p.s / p.tau);
    report.k1 = k1;
  }

  if (contraction.contraction)
    report.r1 = certified_radius(d, contraction, report.image_radius);

  const double degenerate_fraction = static_cast<double>(pairs.degenerate) / pairs.total;
  if (degenerate_fraction > 0.0)
    report.gaps.push_back(fmt::format("{} of {} sampled pairs had f0(x1) == f0(x2)", pairs.degenerate, pairs.total));

  if (!(report.delta0 > 0.0) || !comparison.defined || !(report.k > 0.0))
    report.verdict = Verdict::Fail;
  else if (degenerate_fraction > cfg.degenerate_limit)
    report.verdict = Verdict::Inconclusive;
  else if (!contraction.contraction || !(report.k1 > cfg.k1_floor))
    report.verdict = Verdict::Fail;
  else
    report.verdict = Verdict::Pass;
  return report;
}

} // namespace compsolve
