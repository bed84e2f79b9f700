#include "lindelab/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace lindelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DiscreteDistribution two_point(double p, double s) {
  return make_discrete({{-(1.0 - p) * s, p}, {p * s, 1.0 - p}});
}

DiscreteDistribution symmetric_two_point(double s) {
  return make_discrete({{-s, 0.5}, {s, 0.5}});
}

DiscreteDistribution three_point(double a, double b, double pb) {
  double pa = b * pb / a;
  double p0 = 1.0 - pa - pb;
  std::vector<Atom> atoms{{-a, pa}, {b, pb}};
  if (p0 > 0.0) atoms.push_back({0.0, p0});
  return make_discrete(std::move(atoms));
}

DiscreteDistribution symmetric_three_point(double a, double p) {
  return make_discrete({{-a, p}, {0.0, 1.0 - 2.0 * p}, {a, p}});
}

template <typename Fn>
void parallel_over(size_t count, int threads, Fn&& fn) {
  int workers = std::min<long>(worker_count(threads), static_cast<long>(count));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string canonical_family(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  if (name == "mixtures") name = "mixture";
  return name;
}

}  // namespace

CorpusSpec default_corpus() {
  CorpusSpec spec;
  spec.gamma_grid.push_back(constants().gamma_star);
  spec.families = {
      {"two_point", {0.05, 0.1, 0.2, 0.35, 0.5}, {1.0}, {}, {}},
      {"symmetric_two_point", {}, {0.5, 1.0}, {}, {}},
      {"three_point", {0.1, 0.3}, {}, {0.5, 1.5}, {1.0}},
      {"symmetric_three_point", {0.15, 0.4}, {}, {1.0}, {}},
      {"mixture", {0.1, 0.3, 0.5}, {}, {}, {}},
  };
  return spec;
}

CorpusSpec identity_suite_corpus() {
  CorpusSpec spec;
  spec.families = {
      {"two_point",
       {0.03, 0.06, 0.1, 0.15, 0.22, 0.3, 0.38, 0.46, 0.5, 0.58, 0.66, 0.75, 0.85, 0.95},
       {0.5, 1.0, 2.0},
       {},
       {}},
      {"symmetric_two_point", {}, {0.25, 1.0, 3.0}, {}, {}},
      {"three_point", {0.08, 0.2, 0.35}, {}, {0.4, 0.8, 1.6}, {0.6, 1.2}},
      {"symmetric_three_point", {0.1, 0.25, 0.45}, {}, {0.5, 1.0, 2.0}, {}},
      {"mixture", {0.05, 0.15, 0.3, 0.45, 0.6}, {}, {}, {}},
  };
  return spec;
}

std::vector<SumContext> build_contexts(const CorpusSpec& spec) {
  std::vector<std::vector<DiscreteDistribution>> blocks;
  for (const auto& fam : spec.families) {
    std::string name = canonical_family(fam.name);
    if (name == "two_point") {
      for (double p : fam.p)
        for (double s : fam.s) blocks.push_back({two_point(p, s)});
    } else if (name == "symmetric_two_point") {
      for (double s : fam.s) blocks.push_back({symmetric_two_point(s)});
    } else if (name == "three_point") {
      for (double p : fam.p)
        for (double a : fam.a)
          for (double b : fam.b) {
            double pa = b * p / a;
            if (pa + p >= 1.0) continue;
            blocks.push_back({three_point(a, b, p)});
          }
    } else if (name == "symmetric_three_point") {
      for (double p : fam.p)
        for (double a : fam.a) {
          if (!(p > 0.0 && 2.0 * p < 1.0)) continue;
          blocks.push_back({symmetric_three_point(a, p)});
        }
    } else if (name == "mixture") {
      for (size_t i = 0; i + 1 < fam.p.size(); ++i)
        blocks.push_back({two_point(fam.p[i], 1.0), symmetric_two_point(0.75),
                          two_point(fam.p[i + 1], 1.25)});
    } else {
      throw std::invalid_argument("unknown corpus family: " + fam.name);
    }
  }
  std::vector<SumContext> ctxs;
  for (const auto& block : blocks) {
    for (int n : spec.n_values) {
      if (n < 1) throw std::invalid_argument("n values must be positive");
      std::vector<DiscreteDistribution> summands;
      summands.reserve(block.size() * n);
      for (int r = 0; r < n; ++r)
        for (const auto& d : block) summands.push_back(d);
      ctxs.push_back(SumContext::make(std::move(summands)));
    }
  }
  return ctxs;
}

CorpusSpec load_corpus_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open corpus spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("bad JSON in " + path + ": " + e.what());
  }
  CorpusSpec spec;
  spec.families.clear();
  auto grid = [](const nlohmann::json& v) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (x.is_string()) {
        if (x.get<std::string>() == "inf")
          out.push_back(kInf);
        else
          out.push_back(std::stod(x.get<std::string>()));
      } else {
        out.push_back(x.get<double>());
      }
    }
    return out;
  };
  if (!j.contains("families") || !j["families"].is_array())
    throw std::invalid_argument(path + ": corpus spec needs a families array");
  try {
    for (const auto& f : j["families"]) {
      FamilyGrid fam;
      fam.name = f.at("name").get<std::string>();
      if (f.contains("p")) fam.p = grid(f["p"]);
      if (f.contains("s")) fam.s = grid(f["s"]);
      if (f.contains("a")) fam.a = grid(f["a"]);
      if (f.contains("b")) fam.b = grid(f["b"]);
      spec.families.push_back(std::move(fam));
    }
    if (j.contains("n")) {
      spec.n_values.clear();
      for (const auto& n : j["n"]) spec.n_values.push_back(n.get<int>());
    }
    if (j.contains("pruneTol")) spec.prune_tol = j["pruneTol"].get<double>();
    if (j.contains("g")) {
      spec.g_specs.clear();
      for (const auto& g : j["g"]) spec.g_specs.push_back(g.get<std::string>());
    }
    if (j.contains("esseen_eps")) spec.esseen_eps = grid(j["esseen_eps"]);
    if (j.contains("rozovskii_eps")) spec.rozovskii_eps = grid(j["rozovskii_eps"]);
    if (j.contains("gamma")) spec.gamma_grid = grid(j["gamma"]);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": malformed corpus spec: " + e.what());
  }
  return spec;
}

CorpusResult run_corpus(const CorpusSpec& spec, const std::vector<InequalityId>& ids,
                        int threads) {
  std::vector<SumContext> ctxs = build_contexts(spec);
  std::vector<std::vector<BoundReport>> slots(ctxs.size());

  parallel_over(ctxs.size(), threads, [&](size_t i) {
    const SumContext& ctx = ctxs[i];
    DeltaEstimate delta = exact_delta(ctx, spec.prune_tol);
    std::vector<BoundReport>& out = slots[i];
    std::vector<GFunction> gs;
    gs.reserve(spec.g_specs.size());
    for (const auto& s : spec.g_specs) gs.push_back(parse_gfunction(s, ctx.bn()));

    for (InequalityId id : ids) {
      auto check = [&](const std::optional<FractionParams>& params) {
        out.push_back(check_inequality(ctx, id, params, delta));
      };
      switch (id) {
        case InequalityId::kp:
        case InequalityId::wang_ahmad:
          for (const auto& g : gs) check(FractionParams{g, 1.0, 1.0});
          break;
        case InequalityId::osipov1:
        case InequalityId::esseen:
        case InequalityId::esseen_bounded:
        case InequalityId::rozovskii:
          check(std::nullopt);
          break;
        case InequalityId::osipov:
          for (double eps : spec.rozovskii_eps)
            check(FractionParams{GFunction::identity(), eps, 1.0});
          break;
        case InequalityId::esseen_gamma:
          for (double eps : spec.esseen_eps)
            for (double gamma : spec.gamma_grid)
              check(FractionParams{GFunction::identity(), eps, gamma});
          break;
        case InequalityId::rozovskii_gamma:
          for (double eps : spec.rozovskii_eps)
            for (double gamma : spec.gamma_grid)
              check(FractionParams{GFunction::identity(), eps, gamma});
          break;
        case InequalityId::esseen_g:
          for (const auto& g : gs)
            for (double eps : spec.esseen_eps) check(FractionParams{g, eps, 1.0});
          break;
        case InequalityId::rozovskii_g:
          for (const auto& g : gs)
            for (double eps : spec.rozovskii_eps) check(FractionParams{g, eps, 1.0});
          break;
        case InequalityId::esseen_g_gamma:
          for (const auto& g : gs)
            for (double eps : spec.esseen_eps)
              for (double gamma : spec.gamma_grid) check(FractionParams{g, eps, gamma});
          break;
        case InequalityId::rozovskii_g_gamma:
          for (const auto& g : gs)
            for (double eps : spec.rozovskii_eps)
              for (double gamma : spec.gamma_grid) check(FractionParams{g, eps, gamma});
          break;
      }
    }
  });

  CorpusResult result;
  for (auto& slot : slots)
    for (auto& r : slot) result.reports.push_back(std::move(r));
  std::stable_partition(result.reports.begin(), result.reports.end(),
                        [](const BoundReport& r) { return !r.pass; });
  result.summary.total = result.reports.size();
  for (const auto& r : result.reports) {
    if (!r.pass) ++result.summary.failures;
    auto [it, inserted] = result.summary.max_ratio.try_emplace(r.inequality, r.ratio);
    if (!inserted) it->second = std::max(it->second, r.ratio);
  }
  return result;
}

SuiteResult run_theorem2_suite(std::span<const SumContext> ctxs,
                               std::span<const double> eps_grid,
                               std::span<const double> gamma_grid, int threads) {
  std::vector<std::vector<std::string>> slots(ctxs.size());
  std::atomic<size_t> checks{0};
  parallel_over(ctxs.size(), threads, [&](size_t i) {
    const SumContext& ctx = ctxs[i];
    for (double eps : eps_grid)
      for (double gamma : gamma_grid) {
        Theorem2Report rep = theorem2_checks(ctx, eps, gamma);
        checks.fetch_add(4);
        if (rep.pass()) continue;
        std::ostringstream os;
        os << "ctx=" << ctx.describe() << " eps=" << eps << " gamma=" << gamma << ":";
        if (!rep.eq_repr_ok)
          os << " split-representation lhs=" << rep.eq_repr_lhs << " rhs=" << rep.eq_repr_rhs;
        if (!rep.esseen_bounds_ok) os << " esseen(g1)=" << rep.esseen_g1 << " out of bounds";
        if (!rep.rozovskii_bounds_ok)
          os << " rozovskii(g1)=" << rep.rozovskii_g1 << " out of bounds";
        if (!rep.degenerate_ok) os << " degenerate identity violated";
        slots[i].push_back(os.str());
      }
  });
  SuiteResult res;
  res.checks = checks.load();
  for (auto& s : slots)
    for (auto& f : s) res.failures.push_back(std::move(f));
  return res;
}

std::vector<GFunction> property_suite_weights(double bn) {
  return {
      GFunction::identity(),
      GFunction::constant_one(),
      GFunction::power(0.5),
      GFunction::clip_above(bn),
      GFunction::clip_below(bn),
      GFunction::scaled(7.0, GFunction::power(0.3)),
      GFunction::tabulated({{0.5, 0.7}, {1.0, 1.0}, {2.0, 1.5}, {4.0, 2.2}}),
  };
}

SuiteResult run_property_suite(std::span<const SumContext> ctxs, int threads) {
  std::vector<std::vector<std::string>> slots(ctxs.size());
  std::atomic<size_t> checks{0};

  parallel_over(ctxs.size(), threads, [&](size_t i) {
    const SumContext& ctx = ctxs[i];
    auto& fails = slots[i];
    auto fail = [&](const std::string& what) {
      fails.push_back("ctx=" + ctx.describe() + ": " + what);
    };
    auto count = [&](bool ok, const std::string& what) {
      checks.fetch_add(1);
      if (!ok) fail(what);
    };
    auto rel_eq = [](double x, double y, double tol) {
      return std::fabs(x - y) <= tol * std::max({std::fabs(x), std::fabs(y), 1e-300});
    };

    // truncated-moment inequalities on a grid plus the context breakpoints
    std::vector<double> eps_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    for (size_t k = 0; k < ctx.breakpoints().size() && k < 8; ++k)
      eps_grid.push_back(ctx.breakpoints()[k]);
    for (double eps : eps_grid) {
      double lam = abs_third_fraction(ctx, eps);
      double m = third_moment_fraction(ctx, eps);
      count(lam <= eps * (1.0 + 1e-12), "Lambda(eps) > eps at eps=" + std::to_string(eps));
      count(std::fabs(m) <= lam * (1.0 + 1e-12) + 1e-300,
            "|M(eps)| > Lambda(eps) at eps=" + std::to_string(eps));
    }

    // the truncated-moment sum L + Lambda is minimized at eps = 1
    {
      double v1 = osipov_fraction(ctx, 1.0);
      double lo = std::log(0.02), hi = std::log(8.0);
      double min_v = v1;
      for (int k = 0; k < 160; ++k) {
        double eps = std::exp(lo + (hi - lo) * k / 159.0);
        min_v = std::min(min_v, osipov_fraction(ctx, eps));
      }
      count(rel_eq(min_v, v1, 1e-10) && min_v >= v1 - 1e-10 * std::max(1.0, v1),
            "L(eps)+Lambda(eps) dips below its eps=1 value");
    }

    GFunction g0 = GFunction::clip_above(ctx.bn());
    GFunction g1 = GFunction::clip_below(ctx.bn());
    std::vector<GFunction> weights = property_suite_weights(ctx.bn());

    // membership of every suite weight, tabulated included
    {
      std::vector<double> probe;
      for (int k = 0; k < 64; ++k)
        probe.push_back(ctx.bn() * std::pow(10.0, -3.0 + 6.0 * k / 63.0));
      for (const auto& g : weights) {
        std::string why;
        count(validate_gclass(g, probe, &why), "weight " + g.describe() + " failed: " + why);
      }
    }

    const std::vector<std::pair<double, double>> param_grid{{0.5, 1.0}, {1.0, 0.72}, {2.5, 4.0}};
    const std::vector<double> scales{1e-3, 0.37, 42.0, 1e3};
    for (const auto& g : weights) {
      for (auto [eps, gamma] : param_grid) {
        FractionParams p{g, eps, gamma};
        double fe = esseen_fraction(ctx, p).value;
        double fr = rozovskii_fraction(ctx, p).value;
        for (double c : scales) {
          FractionParams ps{GFunction::scaled(c, g), eps, gamma};
          count(rel_eq(esseen_fraction(ctx, ps).value, fe, 1e-12),
                "esseen scale invariance broken for " + g.describe());
          count(rel_eq(rozovskii_fraction(ctx, ps).value, fr, 1e-12),
                "rozovskii scale invariance broken for " + g.describe());
        }
        double fe0 = esseen_fraction(ctx, {g0, eps, gamma}).value;
        double fe1 = esseen_fraction(ctx, {g1, eps, gamma}).value;
        double fr0 = rozovskii_fraction(ctx, {g0, eps, gamma}).value;
        double fr1 = rozovskii_fraction(ctx, {g1, eps, gamma}).value;
        double slack = 1e-12;
        count(fe >= fe0 * (1.0 - slack) && fe <= fe1 * (1.0 + slack),
              "esseen sandwich broken for " + g.describe());
        count(fr >= fr0 * (1.0 - slack) && fr <= fr1 * (1.0 + slack),
              "rozovskii sandwich broken for " + g.describe());
      }
    }

    // for eps <= 1 the extremal weights reduce to the unweighted forms, exactly
    for (double eps : {0.25, 0.5, 1.0})
      for (double gamma : {0.72, 4.0}) {
        FractionParams p0{g0, eps, gamma};
        FractionParams pid{GFunction::identity(), eps, gamma};
        FractionParams p1{g1, eps, gamma};
        FractionParams pc{GFunction::constant_one(), eps, gamma};
        count(esseen_fraction(ctx, p0).value == esseen_fraction(ctx, pid).value,
              "esseen g0 != identity at eps<=1");
        count(rozovskii_fraction(ctx, p0).value == rozovskii_fraction(ctx, pid).value,
              "rozovskii g0 != identity at eps<=1");
        count(esseen_fraction(ctx, p1).value == esseen_fraction(ctx, pc).value,
              "esseen g1 != const at eps<=1");
        count(rozovskii_fraction(ctx, p1).value == rozovskii_fraction(ctx, pc).value,
              "rozovskii g1 != const at eps<=1");
      }
  });

  SuiteResult res;
  res.checks = checks.load();
  for (auto& s : slots)
    for (auto& f : s) res.failures.push_back(std::move(f));
  return res;
}

}  // namespace lindelab
