#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "lindelab/corpus.hpp"
#include "lindelab/report_io.hpp"
#include "lindelab/verify.hpp"
#include "oracle.hpp"

using namespace lindelab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SumContext pm1(int n = 1) {
  std::vector<DiscreteDistribution> s(n, make_discrete({{-1.0, 0.5}, {1.0, 0.5}}));
  return SumContext::make(std::move(s));
}

}  // namespace

TEST_SUITE_BEGIN("verify");

TEST_CASE("root-based constants") {
  auto gs = gamma_star_constants();
  CHECK(gs.x0 == doctest::Approx(5.487414).epsilon(1e-5 / 5.487414));
  CHECK(std::fabs(gs.kappa - 0.5315) <= 5e-4);
  CHECK(std::fabs(gs.gamma_star - 0.5599) <= 5e-4);
  // reproducible bit-for-bit
  auto gs2 = gamma_star_constants();
  CHECK(gs.x0 == gs2.x0);
  CHECK(gs.kappa == gs2.kappa);
  CHECK(gs.gamma_star == gs2.gamma_star);
}

TEST_CASE("lower bound for the second-moment constant") {
  auto lb = a1_lower_bound();
  CHECK(std::fabs(lb.value - 0.54093) <= 1e-4);
  CHECK(lb.x_star > 0.15);
  CHECK(lb.x_star < 0.3);
  // endpoint sanity: the maximized function is 0.5 at x = 0 and vanishes at inf
  auto h = [](double x) { return std::fabs(1.0 / (1.0 + x * x) - normal_cdf(-x)); };
  CHECK(h(1e-12) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(lb.value > 0.5);
  CHECK(h(200.0) < 1e-4);  // both terms vanish at infinity, the rational one like 1/x^2
  auto lb2 = a1_lower_bound();
  CHECK(lb.x_star == lb2.x_star);
  CHECK(lb.value == lb2.value);
}

TEST_CASE("constant lookups") {
  CHECK(constant_for(InequalityId::kp).value == 1.87);
  CHECK(constant_for(InequalityId::esseen).value == 2.66);
  CHECK(constant_for(InequalityId::esseen_bounded).value == 2.73);
  CHECK(constant_for(InequalityId::rozovskii).value == 2.73);
  CHECK(constant_for(InequalityId::wang_ahmad).value == 2.73);

  // exact rows
  CHECK(constant_for(InequalityId::esseen_g_gamma, 1.0, 0.72).value == 2.7298);
  double gstar = constants().gamma_star;
  CHECK(constant_for(InequalityId::rozovskii_g_gamma, 1.0, gstar).value == 2.7286);
  CHECK(constant_for(InequalityId::rozovskii_gamma, 0.5, 1.0).value == 3.0396);

  // domination: for the unweighted balanced form any dominated entry applies
  CHECK(constant_for(InequalityId::esseen_gamma, 2.0, 1.0).value == 2.6999);
  CHECK(constant_for(InequalityId::esseen_gamma, kInf, kInf).value == 2.6409);
  // the weighted form beyond eps = 1 falls back to the eps = 1 rows
  CHECK(constant_for(InequalityId::esseen_g_gamma, 2.0, 1.0).value == 2.7298);
  CHECK(constant_for(InequalityId::esseen_g, 2.0).value == 2.7298);
  // Rozovskii-side scaling beyond eps = 1
  CHECK(constant_for(InequalityId::rozovskii_g_gamma, 3.0, 1.0).value ==
        doctest::Approx(3.0 * 2.6769).epsilon(1e-15));

  CHECK_THROWS_AS(constant_for(InequalityId::rozovskii_g_gamma, kInf, 1.0),
                  NoConstantAvailable);
  CHECK_THROWS_AS(constant_for(InequalityId::rozovskii_gamma, 0.7, 1.0), NoConstantAvailable);
  CHECK_THROWS_AS(constant_for(InequalityId::esseen_gamma, 0.5, 1.0), NoConstantAvailable);
  CHECK_THROWS_AS(constant_for(InequalityId::esseen_gamma, 1.0, 0.1), NoConstantAvailable);
}

TEST_CASE("inequality checks on the coin flip") {
  auto ctx = pm1();
  auto r = check_inequality(ctx, InequalityId::kp,
                            FractionParams{GFunction::identity(), 1.0, 1.0});
  CHECK(r.fraction_value == 1.0);
  CHECK(r.constant_used == 1.87);
  CHECK(r.delta_n == doctest::Approx(0.34134474606854293).epsilon(1e-13));
  CHECK(r.ratio == doctest::Approx(0.34134474606854293).epsilon(1e-13));
  CHECK(r.pass);

  auto r14 = check_inequality(ctx, InequalityId::esseen_g_gamma,
                              FractionParams{GFunction::clip_above(ctx.bn()), 1.0, 0.72});
  CHECK(r14.constant_used == 2.7298);
  CHECK(r14.pass);

  auto sym = SumContext::make({make_discrete({{-1.0, 0.5}, {1.0, 0.5}}),
                               make_discrete({{-0.5, 0.5}, {0.5, 0.5}})});
  auto r15 = check_inequality(
      sym, InequalityId::rozovskii_g_gamma,
      FractionParams{GFunction::clip_below(sym.bn()), 0.5, constants().gamma_star});
  CHECK(r15.fraction_value == 1.0);
  CHECK(r15.constant_used == 3.0396);
  CHECK(r15.pass);

  CHECK_THROWS_AS(check_inequality(ctx, InequalityId::kp), std::invalid_argument);
}

TEST_CASE("theorem-2 style report") {
  auto ctx = pm1();
  auto rep = theorem2_checks(ctx, 3.0, 2.0);
  CHECK(rep.eq_repr_lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.eq_repr_rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.pass());

  auto rep2 = theorem2_checks(ctx, 0.5, 0.9);
  CHECK(rep2.esseen_g1 == 1.0);
  CHECK(rep2.pass());

  auto asym = SumContext::make({make_discrete({{-0.2, 0.8}, {0.8, 0.2}})});
  auto rep3 = theorem2_checks(asym, 2.0, 1.0);
  CHECK(rep3.esseen_g1 >= 1.0);
  CHECK(rep3.esseen_g1 <= 2.0 * (1 + 1e-12));
  CHECK(rep3.pass());
}

TEST_CASE("identity and property suites on a small corpus") {
  CorpusSpec spec;
  spec.families = {
      {"two_point", {0.1, 0.3, 0.5}, {1.0}, {}, {}},
      {"symmetric_two_point", {}, {1.0}, {}, {}},
      {"three_point", {0.2}, {}, {0.8}, {1.2}},
  };
  spec.n_values = {1, 2};
  auto ctxs = build_contexts(spec);
  REQUIRE(ctxs.size() == 10);
  double grid_e[] = {0.25, 1.0, 2.0};
  double grid_g[] = {0.25, 1.0, 4.0};
  auto t2 = run_theorem2_suite(ctxs, grid_e, grid_g);
  CHECK(t2.checks > 0);
  for (const auto& f : t2.failures) CAPTURE(f);
  CHECK(t2.ok());
  auto props = run_property_suite(ctxs);
  for (const auto& f : props.failures) CAPTURE(f);
  CHECK(props.ok());
}

TEST_CASE("corpus run has no failures and sane ratios") {
  CorpusSpec spec;
  spec.families = {
      {"two_point", {0.1, 0.4}, {1.0}, {}, {}},
      {"symmetric_two_point", {}, {1.0}, {}, {}},
      {"mixture", {0.15, 0.45}, {}, {}, {}},
  };
  spec.n_values = {1, 2};
  auto result = run_corpus(spec, all_inequalities());
  CHECK(result.summary.total > 100);
  CHECK(result.summary.failures == 0);
  for (const auto& [id, ratio] : result.summary.max_ratio) {
    CAPTURE(id);
    CHECK(ratio > 0.0);
    CHECK(ratio < 2.9);  // nothing may come close to violating its constant
  }
}

TEST_CASE("empty corpus yields an empty report") {
  CorpusSpec spec;
  spec.families.clear();
  auto result = run_corpus(spec, all_inequalities());
  CHECK(result.reports.empty());
  CHECK(result.summary.total == 0);
  CHECK(result.summary.failures == 0);
}

TEST_CASE("reports round-trip through JSON") {
  auto ctx = pm1();
  std::vector<BoundReport> reports{
      check_inequality(ctx, InequalityId::kp, FractionParams{GFunction::identity(), 1.0, 1.0}),
      check_inequality(ctx, InequalityId::osipov1),
      check_inequality(ctx, InequalityId::esseen_gamma,
                       FractionParams{GFunction::identity(), kInf, 1.0}),
  };
  for (const auto& r : reports) {
    BoundReport back = report_from_json(report_to_json(r));
    CHECK(back.inequality == r.inequality);
    CHECK(back.ctx == r.ctx);
    CHECK(back.g == r.g);
    CHECK((back.eps == r.eps || (std::isnan(back.eps) && std::isnan(r.eps))));
    CHECK((back.gamma == r.gamma || (std::isnan(back.gamma) && std::isnan(r.gamma))));
    CHECK(back.fraction_value == r.fraction_value);
    CHECK(back.constant_used == r.constant_used);
    CHECK(back.delta_n == r.delta_n);
    CHECK(back.ratio == r.ratio);
    CHECK(back.pass == r.pass);
  }
  std::string csv = reports_to_csv(reports);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
}

TEST_CASE("zero-budget search returns the coarse-grid best, deterministically") {
  FamilySearchSpec spec;
  spec.family = "two-point";
  spec.n = 1;
  spec.g_spec = "clip-above:B";
  auto r1 = lower_bound_search(InequalityId::kp, spec, 0);
  auto r2 = lower_bound_search(InequalityId::kp, spec, 0);
  CHECK(r1.best_ratio == r2.best_ratio);
  CHECK(r1.best_params == r2.best_params);
  CHECK(r1.best_ratio > 0.3);
  CHECK(r1.best_ratio <= 1.87);
}

TEST_CASE("search stays below the table constants") {
  FamilySearchSpec spec;
  spec.family = "two-point";
  spec.n = 2;
  spec.eps = 1.0;
  spec.gamma = 0.72;
  spec.g_spec = "clip-above:B";
  auto r = lower_bound_search(InequalityId::esseen_g_gamma, spec, 400);
  CHECK(r.best_ratio <= 2.7298);
  CHECK(r.evals >= 45);

  FamilySearchSpec sym;
  sym.family = "symmetric-two-point";
  sym.n = 2;
  sym.eps = 1.0;
  sym.gamma = 1.0;
  sym.g_spec = "clip-above:B";
  auto rs = lower_bound_search(InequalityId::esseen_g_gamma, sym, 200);
  CHECK(rs.best_ratio > 0.0);
  CHECK(rs.best_ratio <= 2.7298);
}

TEST_CASE("searched lower bounds stay below every upper constant") {
  struct Case {
    InequalityId id;
    double cap;
  };
  const Case cases[] = {
      {InequalityId::kp, 1.87},      {InequalityId::osipov1, 1.87},
      {InequalityId::esseen, 2.66},  {InequalityId::esseen_bounded, 2.73},
      {InequalityId::rozovskii, 2.73}, {InequalityId::wang_ahmad, 2.73},
  };
  for (const auto& c : cases) {
    FamilySearchSpec spec;
    spec.family = "two-point";
    spec.n = 1;
    spec.g_spec = "clip-above:B";
    auto r = lower_bound_search(c.id, spec, 100);
    CAPTURE(to_string(c.id));
    CHECK(r.best_ratio > 0.0);
    CHECK(r.best_ratio <= c.cap);
  }
}

TEST_CASE("symmetric contexts never exceed the gamma-free constant") {
  // with a vanishing third-moment sum the fraction is gamma-free, so the
  // strongest table entry applies at every balance parameter
  std::mt19937 rng(31);
  for (int i = 0; i < 15; ++i) {
    std::vector<DiscreteDistribution> s;
    int n = 1 + (i % 3);
    for (int k = 0; k < n; ++k) s.push_back(oracle::random_symmetric_two_point(rng));
    auto ctx = SumContext::make(std::move(s));
    double delta = exact_delta(ctx).delta;
    double fraction =
        esseen_fraction(ctx, {GFunction::identity(), kInf, 1.0}).value;
    CHECK(delta / fraction <= 2.6409);
  }
}

TEST_CASE("corpus spec loading") {
  {
    std::ofstream out("spec_test.json");
    out << R"({
      "families": [
        {"name": "two_point", "p": [0.2, 0.4], "s": [1.0]},
        {"name": "symmetric-two-point", "s": [0.5]}
      ],
      "n": [1, 3],
      "pruneTol": 1e-15,
      "g": ["identity", "power:0.5"],
      "esseen_eps": [1, "inf"],
      "rozovskii_eps": [0.5, 1],
      "gamma": [1]
    })";
  }
  CorpusSpec spec = load_corpus_spec("spec_test.json");
  CHECK(spec.families.size() == 2);
  CHECK(spec.n_values == std::vector<int>{1, 3});
  CHECK(spec.prune_tol == 1e-15);
  CHECK(spec.g_specs.size() == 2);
  REQUIRE(spec.esseen_eps.size() == 2);
  CHECK(std::isinf(spec.esseen_eps[1]));
  auto ctxs = build_contexts(spec);
  CHECK(ctxs.size() == 6);  // 3 family members x 2 n values
  CHECK(ctxs[1].summands().size() == 3);
  auto result = run_corpus(spec, {InequalityId::kp, InequalityId::esseen_gamma});
  CHECK(result.summary.failures == 0);
  CHECK(result.summary.total == 6 * (2 + 2));  // two weights + two eps values

  CHECK_THROWS_AS(load_corpus_spec("no_such_spec.json"), std::invalid_argument);
  {
    std::ofstream out("spec_bad.json");
    out << R"({"families": [{"name": "bogus"}]})";
  }
  CHECK_THROWS_AS(build_contexts(load_corpus_spec("spec_bad.json")), std::invalid_argument);
  {
    std::ofstream out("spec_bad2.json");
    out << R"({"families": [{"p": [0.2]}]})";  // family without a name
  }
  CHECK_THROWS_AS(load_corpus_spec("spec_bad2.json"), std::invalid_argument);
}

TEST_CASE("worker count respects the environment cap") {
  setenv("LINDEBERG_LAB_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  CHECK(worker_count(2) == 2);  // explicit request wins
  setenv("LINDEBERG_LAB_THREADS", "not-a-number", 1);
  CHECK(worker_count() >= 1);
  unsetenv("LINDEBERG_LAB_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("inequality id round trip") {
  for (InequalityId id : all_inequalities()) {
    auto back = inequality_from_string(to_string(id));
    REQUIRE(back.has_value());
    CHECK(*back == id);
  }
  CHECK(!inequality_from_string("nope").has_value());
}

TEST_SUITE_END();
