#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "lindelab/fractions.hpp"
#include "oracle.hpp"

using namespace lindelab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SumContext pm1(int n = 1) {
  std::vector<DiscreteDistribution> s(n, make_discrete({{-1.0, 0.5}, {1.0, 0.5}}));
  return SumContext::make(std::move(s));
}

SumContext two_point_ctx() {
  return SumContext::make({make_discrete({{-0.2, 0.8}, {0.8, 0.2}})});
}

std::vector<GFunction> weight_variety(double bn) {
  return {GFunction::identity(),
          GFunction::constant_one(),
          GFunction::power(0.5),
          GFunction::clip_above(bn),
          GFunction::clip_below(bn),
          GFunction::clip_above(0.6 * bn),
          GFunction::clip_below(1.7 * bn),
          GFunction::scaled(7.0, GFunction::power(0.3)),
          GFunction::tabulated({{0.5, 0.7}, {1.0, 1.0}, {2.0, 1.5}, {4.0, 2.2}})};
}

}  // namespace

TEST_SUITE_BEGIN("fractions");

TEST_CASE("context invariants") {
  auto ctx = SumContext::make({make_discrete({{-1.0, 0.5}, {1.0, 0.5}}),
                               make_discrete({{-0.5, 0.5}, {0.5, 0.5}}),
                               make_discrete({{0.0, 1.0}})});
  CHECK(ctx.bn2() == 1.25);
  CHECK(ctx.symmetric());
  REQUIRE(ctx.breakpoints().size() == 2);
  CHECK(ctx.breakpoints()[0] < ctx.breakpoints()[1]);
  CHECK(ctx.steps().tail2[0] == ctx.bn2());
  CHECK(ctx.steps().below3[0] == 0.0);
  CHECK_THROWS_AS(SumContext::make({make_discrete({{0.0, 1.0}})}), ContextError);
  CHECK_THROWS_AS(SumContext::make({}), ContextError);
}

TEST_CASE("lindeberg fraction boundaries") {
  auto ctx = pm1();
  CHECK(lindeberg_fraction(ctx, 0.0) == 1.0);
  CHECK(lindeberg_fraction(ctx, 1.0) == 1.0);  // boundary atom stays in the tail
  CHECK(lindeberg_fraction(ctx, 1.0000001) == 0.0);
}

TEST_CASE("lindeberg at zero is exactly one for heterogeneous contexts") {
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto ctx = oracle::random_context(rng);
    CHECK(lindeberg_fraction(ctx, 0.0) == 1.0);
  }
}

TEST_CASE("third moment fraction, strict boundary") {
  auto sym = pm1();
  for (double z : {0.2, 1.0, 5.0}) CHECK(third_moment_fraction(sym, z) == 0.0);
  auto ctx = two_point_ctx();  // B_n = 0.4
  CHECK(third_moment_fraction(ctx, 0.5) == 0.0);  // z B_n = 0.2 excludes the boundary atom
  CHECK(third_moment_fraction(ctx, 2.5) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("absolute third fraction") {
  auto ctx = pm1();
  CHECK(abs_third_fraction(ctx, 2.0) == 1.0);
  CHECK(abs_third_fraction(ctx, 1.0) == 0.0);
  std::mt19937 rng(6);
  for (int i = 0; i < 100; ++i) {
    auto rc = oracle::random_context(rng);
    for (double eps : {0.1, 0.5, 1.0, 3.0, 8.0}) {
      double lam = abs_third_fraction(rc, eps);
      CHECK(lam <= eps * (1 + 1e-12));
      CHECK(std::fabs(third_moment_fraction(rc, eps)) <= lam * (1 + 1e-12) + 1e-300);
    }
  }
}

TEST_CASE("katz-petrov fraction") {
  auto ctx = pm1();
  CHECK(katz_petrov_fraction(ctx, GFunction::identity()) == 1.0);
  CHECK(katz_petrov_fraction(ctx, GFunction::clip_above(ctx.bn())) == 1.0);
  auto iid4 = pm1(4);
  CHECK(katz_petrov_fraction(iid4, GFunction::identity()) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("osipov fraction and its infimum at eps = 1") {
  auto ctx = pm1();
  CHECK(osipov_fraction(ctx, 1.0) == 1.0);
  CHECK(osipov_fraction(ctx, 2.0) == 1.0);
  CHECK(osipov_fraction(ctx, 0.5) == 1.0);
  std::mt19937 rng(8);
  for (int i = 0; i < 40; ++i) {
    auto rc = oracle::random_context(rng);
    double v1 = osipov_fraction(rc, 1.0);
    for (int k = 0; k < 200; ++k) {
      double eps = std::exp(std::log(0.02) + k * (std::log(8.0) - std::log(0.02)) / 199.0);
      CHECK(osipov_fraction(rc, eps) >= v1 * (1 - 1e-10));
    }
  }
}

TEST_CASE("sup of z L(z)") {
  auto ctx = pm1();
  auto r = sup_zL(ctx, 2.0);
  CHECK(r.value == 1.0);
  CHECK(r.z == 1.0);
  CHECK(r.approach == SupApproach::attained);

  auto r2 = sup_zL(ctx, 0.5);
  CHECK(r2.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r2.z == 0.5);
  CHECK(r2.approach == SupApproach::from_left);

  auto r3 = sup_zL(ctx, 1e-9);
  CHECK(r3.value <= 1e-9 * (1 + 1e-12));
}

TEST_CASE("esseen fraction examples") {
  auto ctx = pm1();
  // extremal flat weight, small eps and gamma: identically one, exactly
  auto v1 = esseen_fraction(ctx, {GFunction::clip_below(ctx.bn()), 1.0, 0.5});
  CHECK(v1.value == 1.0);

  auto sym = SumContext::make({make_discrete({{-1.0, 0.5}, {1.0, 0.5}}),
                               make_discrete({{-0.5, 0.5}, {0.5, 0.5}})});
  auto v2 = esseen_fraction(sym, {GFunction::clip_below(sym.bn()), 0.75, 7.0});
  CHECK(v2.value == 1.0);

  auto v3 = esseen_fraction(ctx, {GFunction::identity(), 2.0, 1.0});
  CHECK(v3.value == 1.0);
  CHECK(v3.sup.z == 1.0);
  CHECK(v3.sup.approach == SupApproach::attained);

  // hand value for the asymmetric two-point law
  auto tp = two_point_ctx();
  auto v4 = esseen_fraction(tp, {GFunction::identity(), 2.5, 1.0});
  CHECK(v4.value == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(v4.sup.z == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v4.m_term + v4.sup_term == doctest::Approx(v4.value).epsilon(1e-15));
}

TEST_CASE("rozovskii fraction examples") {
  auto ctx = pm1();
  auto v1 = rozovskii_fraction(ctx, {GFunction::clip_above(ctx.bn()), 3.0, 2.0});
  CHECK(v1.value == 1.0);
  CHECK(v1.m_term == 0.0);

  auto v2 = rozovskii_fraction(ctx, {GFunction::clip_below(ctx.bn()), 0.5, 3.0});
  CHECK(v2.value == 1.0);

  auto tp = two_point_ctx();
  auto v3 = rozovskii_fraction(tp, {GFunction::identity(), 2.5, 1.0});
  CHECK(v3.value == doctest::Approx(3.1).epsilon(1e-12));
  CHECK(v3.m_term == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v3.sup_term == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(v3.sup.z == doctest::Approx(2.0).epsilon(1e-12));
  double orc = oracle::rozovskii_oracle(tp, GFunction::identity(), 2.5, 1.0, 20000);
  CHECK(v3.value == doctest::Approx(orc).epsilon(1e-9));

  CHECK_THROWS_AS(rozovskii_fraction(ctx, {GFunction::identity(), kInf, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("classical per-summand fractions, hand values") {
  auto ctx = pm1();
  CHECK(esseen_classic_fraction(ctx) == 1.0);
  CHECK(esseen_bounded_fraction(ctx) == 1.0);
  CHECK(rozovskii_classic_fraction(ctx) == 1.0);

  auto tp = two_point_ctx();
  CHECK(esseen_bounded_fraction(tp) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(esseen_classic_fraction(tp) == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(rozovskii_classic_fraction(tp) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("classical fractions agree with per-summand oracle") {
  std::mt19937 rng(12);
  for (int i = 0; i < 30; ++i) {
    auto ctx = oracle::random_context(rng);
    double e_full = 0.0, e_bounded = 0.0;
    for (const auto& d : ctx.summands()) {
      e_full += oracle::per_summand_sup_oracle(d, kInf);
      e_bounded += oracle::per_summand_sup_oracle(d, ctx.bn());
    }
    CHECK(esseen_classic_fraction(ctx) ==
          doctest::Approx(e_full / ctx.bn3()).epsilon(1e-9));
    CHECK(esseen_bounded_fraction(ctx) ==
          doctest::Approx(e_bounded / ctx.bn3()).epsilon(1e-9));
  }
}

TEST_CASE("single-summand reductions tie the forms together") {
  std::mt19937 rng(13);
  for (int i = 0; i < 25; ++i) {
    auto ctx = SumContext::make({oracle::random_two_point(rng)});
    CHECK(esseen_classic_fraction(ctx) ==
          doctest::Approx(esseen_fraction(ctx, {GFunction::identity(), kInf, 1.0}).value)
              .epsilon(1e-13));
    CHECK(rozovskii_classic_fraction(ctx) ==
          doctest::Approx(rozovskii_fraction(ctx, {GFunction::identity(), 1.0, 1.0}).value)
              .epsilon(1e-13));
    CHECK(wang_ahmad_fraction(ctx, GFunction::identity()) ==
          doctest::Approx(esseen_classic_fraction(ctx)).epsilon(1e-13));
  }
}

TEST_CASE("split representation of the flat-capped weight") {
  std::mt19937 rng(14);
  for (int i = 0; i < 60; ++i) {
    auto ctx = oracle::random_context(rng);
    GFunction g0 = GFunction::clip_above(ctx.bn());
    for (double eps : {0.3, 1.0, 2.5})
      for (double gamma : {0.5, 1.0, 3.0}) {
        double lhs = rozovskii_fraction(ctx, {g0, eps, gamma}).value;
        double rhs = gamma / std::max(eps, 1.0) * std::fabs(third_moment_fraction(ctx, eps)) +
                     sup_zL(ctx, std::min(eps, 1.0)).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      }
  }
}

TEST_CASE("extremal weights reduce to unweighted forms for eps <= 1, exactly") {
  std::mt19937 rng(15);
  for (int i = 0; i < 60; ++i) {
    auto ctx = oracle::random_context(rng);
    GFunction g0 = GFunction::clip_above(ctx.bn());
    GFunction g1 = GFunction::clip_below(ctx.bn());
    for (double eps : {0.25, 0.6, 1.0})
      for (double gamma : {0.72, 1.0, 4.0}) {
        CHECK(esseen_fraction(ctx, {g0, eps, gamma}).value ==
              esseen_fraction(ctx, {GFunction::identity(), eps, gamma}).value);
        CHECK(rozovskii_fraction(ctx, {g0, eps, gamma}).value ==
              rozovskii_fraction(ctx, {GFunction::identity(), eps, gamma}).value);
        CHECK(esseen_fraction(ctx, {g1, eps, gamma}).value ==
              esseen_fraction(ctx, {GFunction::constant_one(), eps, gamma}).value);
        CHECK(rozovskii_fraction(ctx, {g1, eps, gamma}).value ==
              rozovskii_fraction(ctx, {GFunction::constant_one(), eps, gamma}).value);
      }
  }
}

TEST_CASE("scale invariance of both fractions") {
  std::mt19937 rng(16);
  for (int i = 0; i < 40; ++i) {
    auto ctx = oracle::random_context(rng);
    for (const auto& g : weight_variety(ctx.bn()))
      for (double c : {1e-3, 0.37, 42.0, 1e3})
        for (double eps : {0.5, 2.0})
          for (double gamma : {0.72, 3.0}) {
            FractionParams p{g, eps, gamma};
            FractionParams ps{GFunction::scaled(c, g), eps, gamma};
            double fe = esseen_fraction(ctx, p).value;
            double fes = esseen_fraction(ctx, ps).value;
            CHECK(std::fabs(fe - fes) <= 1e-12 * std::max(fe, fes));
            double fr = rozovskii_fraction(ctx, p).value;
            double frs = rozovskii_fraction(ctx, ps).value;
            CHECK(std::fabs(fr - frs) <= 1e-12 * std::max(fr, frs));
          }
  }
}

TEST_CASE("extremal sandwich for every weight") {
  std::mt19937 rng(17);
  for (int i = 0; i < 30; ++i) {
    auto ctx = oracle::random_context(rng);
    GFunction g0 = GFunction::clip_above(ctx.bn());
    GFunction g1 = GFunction::clip_below(ctx.bn());
    for (const auto& g : weight_variety(ctx.bn()))
      for (double eps : {0.4, 1.0, 3.0})
        for (double gamma : {0.72, 1.0, 4.0}) {
          double fe = esseen_fraction(ctx, {g, eps, gamma}).value;
          CHECK(fe >= esseen_fraction(ctx, {g0, eps, gamma}).value * (1 - 1e-12));
          CHECK(fe <= esseen_fraction(ctx, {g1, eps, gamma}).value * (1 + 1e-12));
          double fr = rozovskii_fraction(ctx, {g, eps, gamma}).value;
          CHECK(fr >= rozovskii_fraction(ctx, {g0, eps, gamma}).value * (1 - 1e-12));
          CHECK(fr <= rozovskii_fraction(ctx, {g1, eps, gamma}).value * (1 + 1e-12));
        }
  }
}

TEST_CASE("esseen fraction is monotone in eps and gamma") {
  std::mt19937 rng(18);
  for (int i = 0; i < 30; ++i) {
    auto ctx = oracle::random_context(rng);
    for (const auto& g : {GFunction::identity(), GFunction::power(0.5)}) {
      double prev = 0.0;
      for (double eps : {0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        double v = esseen_fraction(ctx, {g, eps, 1.3}).value;
        CHECK(v >= prev * (1 - 1e-12));
        prev = v;
      }
      prev = 0.0;
      for (double gamma : {0.2, 0.7, 1.0, 2.0, 8.0}) {
        double v = esseen_fraction(ctx, {g, 1.5, gamma}).value;
        CHECK(v >= prev * (1 - 1e-12));
        prev = v;
      }
    }
  }
}

TEST_CASE("theorem-style two-sided bounds for the flat-floor weight") {
  std::mt19937 rng(19);
  for (int i = 0; i < 60; ++i) {
    auto ctx = oracle::random_context(rng);
    GFunction g1 = GFunction::clip_below(ctx.bn());
    for (double eps : {0.3, 1.0, 2.0, 6.0})
      for (double gamma : {0.25, 1.0, 4.0}) {
        double le = esseen_fraction(ctx, {g1, eps, gamma}).value;
        CHECK(le >= 1.0);
        CHECK(le <= std::max(eps, 1.0) * std::max(gamma, 1.0) * (1 + 1e-12));
        double lr = rozovskii_fraction(ctx, {g1, eps, gamma}).value;
        CHECK(lr >= 1.0);
        CHECK(lr <= std::max(eps, 1.0) * (gamma + 1.0) * (1 + 1e-12));
      }
  }
}

TEST_CASE("sup engine agrees with the dense-grid oracle") {
  std::mt19937 rng(20);
  std::vector<std::pair<double, double>> params{{0.5, 1.0}, {1.0, 0.72}, {2.5, 4.0},
                                                {4.0, 0.25}, {1.0, 1.0}};
  for (int i = 0; i < 25; ++i) {
    auto ctx = oracle::random_context(rng, 2);
    auto gs = weight_variety(ctx.bn());
    const auto& g = gs[i % gs.size()];
    auto [eps, gamma] = params[i % params.size()];
    CAPTURE(ctx.describe());
    CAPTURE(g.describe());
    double fe = esseen_fraction(ctx, {g, eps, gamma}).value;
    double oe = oracle::esseen_sup_oracle(ctx, g, eps, gamma, 20000);
    CHECK(std::fabs(fe - oe) <= 1e-9 * std::max(fe, oe));
    double fr = rozovskii_fraction(ctx, {g, eps, gamma}).value;
    double orr = oracle::rozovskii_oracle(ctx, g, eps, gamma, 20000);
    CHECK(std::fabs(fr - orr) <= 1e-9 * std::max(fr, orr));
  }
}

TEST_CASE("esseen with unbounded range matches the oracle") {
  std::mt19937 rng(21);
  for (int i = 0; i < 10; ++i) {
    auto ctx = oracle::random_context(rng, 2);
    for (const auto& g : {GFunction::identity(), GFunction::clip_above(ctx.bn())}) {
      double fe = esseen_fraction(ctx, {g, kInf, 1.0}).value;
      double oe = oracle::esseen_sup_oracle(ctx, g, kInf, 1.0, 20000);
      CHECK(std::fabs(fe - oe) <= 1e-9 * std::max(fe, oe));
    }
  }
}

TEST_CASE("parameter validation") {
  auto ctx = pm1();
  CHECK_THROWS_AS(esseen_fraction(ctx, {GFunction::identity(), 0.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(esseen_fraction(ctx, {GFunction::identity(), 1.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sup_zL(ctx, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lindeberg_fraction(ctx, -0.1), std::invalid_argument);
}

TEST_SUITE_END();
