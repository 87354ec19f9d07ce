#include "helpers.hpp"

#include "compsolve/certify.hpp"
#include "compsolve/errors.hpp"
#include "compsolve/io.hpp"

#include <doctest.h>

using namespace compsolve;

namespace {

SamplerConfig small_sampler(std::uint64_t seed = 1)
{
  SamplerConfig cfg;
  cfg.n_sphere = 64;
  cfg.n_radii = 8;
  cfg.n_pairs = 1024;
  cfg.rng_seed = seed;
  return cfg;
}

/// Odd staircase, flat on bins of width 1/4: most close pairs are degenerate.
class StaircaseSurrogate final : public Surrogate
{
public:
  StaircaseSurrogate() : Surrogate({}) {}
  SurrogateKind kind() const override { return SurrogateKind::Linear; }
  Vec eval(const Vec& x) const override
  {
    return x.unaryExpr([](double t) { return std::copysign(std::ceil(4.0 * std::abs(t)) / 4.0, t); });
  }
  Vec solve(const Vec&, const Vec&) const override { throw SurrogateSolveFailed("not invertible"); }
};

} // namespace

TEST_CASE("growth of the identity is t")
{
  const auto d = testing::scaled_identity(2, 1.0, 1.0);
  for (const auto& p : estimate_growth_mu(d, small_sampler()))
    CHECK(p.v == doctest::Approx(p.t).epsilon(1e-12));
}

TEST_CASE("growth of the sine fixture is at most 1.25 t")
{
  const auto d = testing::sin_fixture(1, 1.0);
  const auto mu = estimate_growth_mu(d, small_sampler());
  CHECK(mu.back().t == doctest::Approx(1.0));
  CHECK(mu.back().v <= 1.25);
  CHECK(mu.back().v >= 1.0 + 0.25 * std::sin(1.0) - 1e-12);
}

TEST_CASE("growth of the zero map vanishes")
{
  const auto d = testing::scaled_identity(2, 1.0, 0.0);
  for (const auto& p : estimate_growth_mu(d, small_sampler()))
    CHECK(p.v == 0.0);
}

TEST_CASE("coercivity")
{
  const auto id = testing::scaled_identity(3, 2.0, 1.0);
  const auto est = estimate_coercivity_nu(id, small_sampler());
  for (const auto& p : est.nu)
    CHECK(p.v == doctest::Approx(p.t).epsilon(1e-12));
  CHECK(est.delta0 == doctest::Approx(2.0).epsilon(1e-12));

  const Decomposition neg{testing::componentwise(2, 1.0, [](double t) { return -t; }), linear_surrogate(-Mat::Identity(2, 2))};
  CHECK(estimate_coercivity_nu(neg, small_sampler()).delta0 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(certify(neg, small_sampler()).verdict == Verdict::Fail);
}

TEST_CASE("coercivity of a monotone blend is at least t")
{
  // f0 = (phi_hi x + phi_lo x) / 2 with phi in [1, 2]
  const auto X = Space::lp(2, 2.0);
  const Mapping upper(X, X, [](const Vec& x) -> Vec { return 2.0 * x; }, {Vec::Zero(2), 1.0});
  const Mapping lower(X, X, [](const Vec& x) -> Vec { return x; }, {Vec::Zero(2), 1.0});
  const Decomposition d{upper, monotone_blend_surrogate(upper, lower, 0.5, 0.5)};
  for (const auto& p : estimate_coercivity_nu(d, small_sampler()).nu)
    CHECK(p.v >= p.t * (1.0 - 1e-12));
}

TEST_CASE("comparison constant")
{
  CHECK(estimate_comparison_k(testing::scaled_identity(2, 1.0, 1.0), small_sampler()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate_comparison_k(testing::scaled_identity(2, 1.0, 2.0), small_sampler()) ==
        doctest::Approx(2.0).epsilon(1e-12));
  const Decomposition zero{testing::componentwise(1, 1.0, [](double t) { return t; }),
                           diagonal_monotone_surrogate(ScalarFunction::constant_value(0.0))};
  CHECK_THROWS_AS(estimate_comparison_k(zero, small_sampler()), DegenerateDenominator);
}

TEST_CASE("contraction envelope")
{
  const auto same = estimate_contraction(testing::scaled_identity(2, 1.0, 1.0), small_sampler());
  REQUIRE(same.contractive());
  CHECK(same.contraction->sigma == 0.0);
  CHECK(same.contraction->m0 == 1);

  const auto sin = estimate_contraction(testing::sin_fixture(1, 1.0), small_sampler());
  REQUIRE(sin.contractive());
  CHECK(sin.contraction->m0 == 1);
  CHECK(sin.contraction->sigma <= 0.25);
  CHECK(sin.contraction->sigma >= 0.24);

  // f1 = -2x
  const auto neg = estimate_contraction(testing::scaled_identity(2, 1.0, -1.0), small_sampler());
  CHECK_FALSE(neg.contractive());
  CHECK(neg.sigma_by_m.front() == doctest::Approx(2.0).epsilon(1e-9));

  SamplerConfig one = small_sampler();
  one.n_pairs = 1;
  CHECK_THROWS_AS(estimate_contraction(testing::sin_fixture(1, 1.0), one), ConfigError);
}

TEST_CASE("local stability")
{
  CHECK(estimate_local_stability_k1(testing::scaled_identity(2, 1.0, 1.0), small_sampler()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate_local_stability_k1(testing::scaled_identity(2, 1.0, 3.0), small_sampler()) ==
        doctest::Approx(3.0).epsilon(1e-12));

  const Decomposition cube{testing::componentwise(1, 1.0, [](double t) { return t * t * t; }), identity_surrogate(1)};
  CHECK(estimate_local_stability_k1(cube, small_sampler()) < 0.05);
  CHECK(certify(cube, small_sampler()).verdict == Verdict::Fail);
}

TEST_CASE("degenerate pairs make the certificate inconclusive")
{
  const Decomposition d{testing::componentwise(1, 1.0, [](double t) {
                          return std::copysign(std::ceil(4.0 * std::abs(t)) / 4.0, t);
                        }),
                        std::make_shared<StaircaseSurrogate>()};
  const auto report = certify(d, small_sampler());
  CHECK(report.degenerate_pairs > report.total_pairs / 10);
  CHECK(report.verdict == Verdict::Inconclusive);
}

TEST_CASE("solvable set membership")
{
  const auto d = testing::scaled_identity(1, 1.0, 1.0);
  const auto inside = solvable_set_membership(d, Vec::Constant(1, 0.5), small_sampler());
  REQUIRE(std::holds_alternative<Member>(inside));
  CHECK(std::get<Member>(inside).margin == doctest::Approx(0.5).epsilon(1e-12));

  const auto outside = solvable_set_membership(d, Vec::Constant(1, 2.0), small_sampler());
  REQUIRE(std::holds_alternative<NonMember>(outside));
  CHECK(std::abs(std::get<NonMember>(outside).witness[0]) == doctest::Approx(1.0));

  CHECK(std::holds_alternative<Inconclusive>(solvable_set_membership(d, Vec::Constant(1, 1.0), small_sampler())));
}

TEST_CASE("identity certificate")
{
  const auto report = certify(testing::scaled_identity(3, 1.0, 1.0), small_sampler());
  CHECK(report.verdict == Verdict::Pass);
  CHECK(report.k == doctest::Approx(1.0));
  CHECK(report.k1 == doctest::Approx(1.0));
  REQUIRE(report.r1);
  CHECK(*report.r1 == doctest::Approx(0.99));
  CHECK_FALSE(report.gaps.empty());
}

TEST_CASE("certificate is deterministic for a fixed seed")
{
  const auto d = testing::sin_fixture(4, 2.0);
  const auto a = report_to_json(certify(d, small_sampler(42))).dump();
  const auto b = report_to_json(certify(d, small_sampler(42))).dump();
  CHECK(a == b);
  const auto c = report_to_json(certify(d, small_sampler(43))).dump();
  CHECK(a != c);
}

TEST_CASE("scaling f and f0 together")
{
  const double c = 3.0;
  const auto base = testing::sin_fixture(2, 1.0);
  const Decomposition scaled{testing::componentwise(2, 1.0, [c](double t) { return c * (t + 0.25 * std::sin(t)); }),
                             linear_surrogate(c * Mat::Identity(2, 2))};
  const auto a = certify(base, small_sampler(5));
  const auto b = certify(scaled, small_sampler(5));
  for (std::size_t i = 0; i < a.mu.size(); ++i) {
    CHECK(b.mu[i].v == doctest::Approx(c * a.mu[i].v).epsilon(1e-12));
    CHECK(b.nu[i].v == doctest::Approx(c * a.nu[i].v).epsilon(1e-12));
  }
  CHECK(b.delta0 == doctest::Approx(c * a.delta0).epsilon(1e-12));
  CHECK(b.k == doctest::Approx(a.k).epsilon(1e-12));
  CHECK(b.k1 == doctest::Approx(a.k1).epsilon(1e-12));
  REQUIRE(a.contraction);
  REQUIRE(b.contraction);
  CHECK(b.contraction->sigma == doctest::Approx(a.contraction->sigma).epsilon(1e-12));
}

TEST_CASE("sampler validation")
{
  SamplerConfig cfg;
  cfg.n_sphere = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
