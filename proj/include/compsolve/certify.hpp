#pragma once

#include "compsolve/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace compsolve {

struct SamplerConfig
{
  int n_sphere = 256;   ///< sphere directions
  int n_radii = 16;     ///< radius levels r0 j / n_radii, j = 1..n_radii
  int n_pairs = 2048;   ///< point pairs for two-point conditions
  std::uint64_t rng_seed = 0;
  int m_max = 16;       ///< largest m0 tried for k^{m0}(tau) <= sigma tau
  double k1_floor = 0.05;
  double degenerate_limit = 0.10;

  void validate() const;
};

struct EnvelopePoint
{
  double t;
  double v;
};

using EnvelopeTable = std::vector<EnvelopePoint>;

struct CoercivityEstimate
{
  EnvelopeTable nu;
  double delta0;
};

struct Contraction
{
  double sigma;
  int m0;
};

struct ContractionEstimate
{
  std::optional<Contraction> contraction; ///< empty: NotContractive
  std::vector<double> sigma_by_m;         ///< sup_tau k^m(tau) / tau for m = 1..m_max
  /// sum_{j < m0} sup_tau k^j(tau)/tau; bounds the partial sums before the first
  /// sigma block (1 when m0 = 1).
  double block_growth = 1.0;
  int degenerate_pairs = 0;
  int total_pairs = 0;

  bool contractive() const { return contraction.has_value(); }
};

struct Member
{
  double margin;
};

struct NonMember
{
  Vec witness;
  double slack;
};

struct Inconclusive
{
  std::string reason;
};

using Membership = std::variant<Member, NonMember, Inconclusive>;

enum class Verdict
{
  Pass,
  Fail,
  Inconclusive
};

std::string_view to_string(Verdict v);

struct CertificateReport
{
  EnvelopeTable mu;
  EnvelopeTable nu;
  double k = 0.0;
  double k1 = 0.0;
  std::optional<Contraction> contraction;
  double delta0 = 0.0;
  std::optional<double> r1;
  Verdict verdict = Verdict::Fail;
  std::vector<std::string> gaps;
  std::uint64_t seed = 0;

  // diagnostics, not serialized
  double image_radius = 0.0;
  int degenerate_pairs = 0;
  int total_pairs = 0;
};

/// Upper envelope of |f(x) - f(x0)| against |x - x0|, made nondecreasing.
EnvelopeTable estimate_growth_mu(const Decomposition& d, const SamplerConfig& cfg);

/// Per-radius minimum of <f0(x) - f0(x0), x - x0> / |x - x0|; delta0 is the value at r0.
CoercivityEstimate estimate_coercivity_nu(const Decomposition& d, const SamplerConfig& cfg);

/// inf <f(x) - f(x0), x - x0> / <f0(x) - f0(x0), x - x0>; throws DegenerateDenominator.
double estimate_comparison_k(const Decomposition& d, const SamplerConfig& cfg);

/// Empirical envelope k(tau) = sup{|df - df0| : |df0| <= tau} and the least m0 with
/// k^{m0}(tau) <= sigma tau, sigma < 1.
ContractionEstimate estimate_contraction(const Decomposition& d, const SamplerConfig& cfg);

/// inf |f(x1) - f(x2)| / |f0(x1) - f0(x2)|; throws AllPairsDegenerate.
double estimate_local_stability_k1(const Decomposition& d, const SamplerConfig& cfg);

/// min over sampled x on the sphere S_{r0}(x0) of |f0(x) - f0(x0)|.
double estimate_image_radius(const Decomposition& d, const SamplerConfig& cfg);

/// Radius of targets |y - f(x0)| for which the recurrence provably stays in the ball:
/// 0.99 (1 - sigma) min(r0, image radius) / block_growth.
double certified_radius(const Decomposition& d, const ContractionEstimate& c, double image_radius);

/// Checks <y - f(x0), x - x0> <= <f(x) - f(x0), x - x0> on sampled x in S_{r0}(x0).
Membership solvable_set_membership(const Decomposition& d, const Vec& y, const SamplerConfig& cfg);

CertificateReport certify(const Decomposition& d, const SamplerConfig& cfg);

} // namespace compsolve
