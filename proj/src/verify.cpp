#include "lindelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace lindelab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

std::string_view to_string(InequalityId id) {
  switch (id) {
    case InequalityId::kp: return "kp";
    case InequalityId::osipov1: return "osipov1";
    case InequalityId::osipov: return "osipov";
    case InequalityId::esseen: return "esseen";
    case InequalityId::esseen_bounded: return "esseen_bounded";
    case InequalityId::rozovskii: return "rozovskii";
    case InequalityId::wang_ahmad: return "wang_ahmad";
    case InequalityId::esseen_gamma: return "esseen_gamma";
    case InequalityId::rozovskii_gamma: return "rozovskii_gamma";
    case InequalityId::esseen_g: return "esseen_g";
    case InequalityId::rozovskii_g: return "rozovskii_g";
    case InequalityId::esseen_g_gamma: return "esseen_g_gamma";
    case InequalityId::rozovskii_g_gamma: return "rozovskii_g_gamma";
  }
  return "?";
}

std::optional<InequalityId> inequality_from_string(std::string_view name) {
  for (InequalityId id : all_inequalities())
    if (to_string(id) == name) return id;
  return std::nullopt;
}

std::vector<InequalityId> all_inequalities() {
  return {InequalityId::kp,
          InequalityId::osipov1,
          InequalityId::osipov,
          InequalityId::esseen,
          InequalityId::esseen_bounded,
          InequalityId::rozovskii,
          InequalityId::wang_ahmad,
          InequalityId::esseen_gamma,
          InequalityId::rozovskii_gamma,
          InequalityId::esseen_g,
          InequalityId::rozovskii_g,
          InequalityId::esseen_g_gamma,
          InequalityId::rozovskii_g_gamma};
}

bool inequality_needs_g(InequalityId id) {
  switch (id) {
    case InequalityId::kp:
    case InequalityId::wang_ahmad:
    case InequalityId::esseen_g:
    case InequalityId::rozovskii_g:
    case InequalityId::esseen_g_gamma:
    case InequalityId::rozovskii_g_gamma:
      return true;
    default:
      return false;
  }
}

bool inequality_needs_eps(InequalityId id) {
  switch (id) {
    case InequalityId::osipov:
    case InequalityId::esseen_gamma:
    case InequalityId::rozovskii_gamma:
    case InequalityId::esseen_g:
    case InequalityId::rozovskii_g:
    case InequalityId::esseen_g_gamma:
    case InequalityId::rozovskii_g_gamma:
      return true;
    default:
      return false;
  }
}

bool inequality_needs_gamma(InequalityId id) {
  switch (id) {
    case InequalityId::esseen_gamma:
    case InequalityId::rozovskii_gamma:
    case InequalityId::esseen_g_gamma:
    case InequalityId::rozovskii_g_gamma:
      return true;
    default:
      return false;
  }
}

namespace {

ConstantsTable build_constants() {
  ConstantsTable t;
  GammaStarConstants gs = gamma_star_constants();
  t.gamma_star = gs.gamma_star;
  t.kappa = gs.kappa;
  t.x0 = gs.x0;
  const double g_star = gs.gamma_star;
  t.ae = {
      {1.21, 0.2, 2.8904}, {1.24, 0.2, 2.8900},  {kInf, 0.2, 2.8846},  {1.76, 0.4, 2.7360},
      {5.94, 0.4, 2.7300}, {kInf, 0.4, 2.7299},  {1.0, g_star, 2.7367}, {1.87, g_star, 2.6999},
      {kInf, g_star, 2.6919}, {1.0, 0.72, 2.7298}, {1.0, kInf, 2.7286}, {4.35, 1.0, 2.6600},
      {kInf, 1.0, 2.6588}, {kInf, 0.97, 2.6599}, {2.56, kInf, 2.6500}, {2.62, 5.0, 2.6500},
      {2.65, 4.0, 2.6500}, {2.74, 3.0, 2.6500},  {3.13, 2.0, 2.6500},  {4.0, 1.62, 2.6500},
      {5.37, 1.5, 2.6500}, {kInf, 1.43, 2.6500}, {kInf, kInf, 2.6409},
  };
  t.ar = {
      {1.21, 0.2, 2.8700},    {5.39, 0.2, 2.8635},   {1.76, 0.4, 2.6999},
      {2.63, 0.4, 2.6933},    {0.5, g_star, 3.0396}, {1.0, g_star, 2.7286},
      {1.99, g_star, 2.6600}, {2.12, g_star, 2.6593}, {3.0, g_star, 2.6769},
      {5.0, g_star, 2.7562},
  };
  return t;
}

std::string entry_source(const char* table, const ConstantsTable::Entry& e) {
  std::ostringstream os;
  os << table << "(";
  if (std::isfinite(e.eps))
    os << e.eps;
  else
    os << "inf";
  os << ",";
  if (std::isfinite(e.gamma))
    os << e.gamma;
  else
    os << "inf";
  os << ")=" << e.value;
  return os.str();
}

// Smallest table value among entries dominated by the request in both
// arguments; valid because the Esseen-side constants decrease in eps and gamma.
ConstantChoice ae_lookup(double eps, double gamma) {
  const ConstantsTable& t = constants();
  const ConstantsTable::Entry* best = nullptr;
  for (const auto& e : t.ae)
    if (e.eps <= eps && e.gamma <= gamma && (!best || e.value < best->value)) best = &e;
  if (!best) {
    std::ostringstream os;
    os << "no Esseen-side constant dominates (eps=" << eps << ", gamma=" << gamma << ")";
    throw NoConstantAvailable(os.str());
  }
  return {best->value, entry_source("AE", *best)};
}

// Rozovskii-side constants are only known to decrease in gamma, so the row
// must match the requested eps exactly.
ConstantChoice ar_lookup(double eps, double gamma) {
  const ConstantsTable& t = constants();
  const ConstantsTable::Entry* best = nullptr;
  for (const auto& e : t.ar)
    if (e.eps == eps && e.gamma <= gamma && (!best || e.value < best->value)) best = &e;
  if (!best) {
    std::ostringstream os;
    os << "no Rozovskii-side constant for eps=" << eps << " with gamma <= " << gamma;
    throw NoConstantAvailable(os.str());
  }
  return {best->value, entry_source("AR", *best)};
}

}  // namespace

const ConstantsTable& constants() {
  static const ConstantsTable table = build_constants();
  return table;
}

ConstantChoice constant_for(InequalityId id, double eps, double gamma) {
  const ConstantsTable& t = constants();
  switch (id) {
    case InequalityId::kp:
    case InequalityId::osipov1:
    case InequalityId::osipov:
      return {t.a1_upper, "A1<=1.87"};
    case InequalityId::esseen:
      return {t.ae_inf_1, "A3<=2.66"};
    case InequalityId::esseen_bounded:
      return {t.ae_1_1, "A4<=2.73"};
    case InequalityId::rozovskii:
      return {t.ar_1_1, "A5<=2.73"};
    case InequalityId::wang_ahmad:
      return {t.ae_1_1, "A6<=2.73"};
    case InequalityId::esseen_gamma:
      return ae_lookup(eps, gamma);
    case InequalityId::esseen_g:
      return ae_lookup(std::min(eps, 1.0), 1.0);
    case InequalityId::esseen_g_gamma:
      return ae_lookup(std::min(eps, 1.0), gamma);
    case InequalityId::rozovskii_gamma:
      return ar_lookup(eps, gamma);
    case InequalityId::rozovskii_g:
    case InequalityId::rozovskii_g_gamma: {
      if (!std::isfinite(eps))
        throw NoConstantAvailable("the weighted Rozovskii constant is unbounded as eps -> inf");
      ConstantChoice base = ar_lookup(eps, id == InequalityId::rozovskii_g ? 1.0 : gamma);
      if (eps > 1.0) {
        std::ostringstream os;
        os << eps << "*" << base.source;
        return {eps * base.value, os.str()};
      }
      return base;
    }
  }
  throw NoConstantAvailable("unknown inequality");
}

DeltaEstimate exact_delta(const SumContext& ctx, double prune_tol) {
  SumDistribution s = convolve(ctx, prune_tol);
  return {kolmogorov_delta(s), s.dropped_mass};
}

double fraction_for(const SumContext& ctx, InequalityId id,
                    const std::optional<FractionParams>& params) {
  auto need = [&]() -> const FractionParams& {
    if (!params) throw std::invalid_argument(std::string("inequality ") +
                                             std::string(to_string(id)) + " needs parameters");
    return *params;
  };
  switch (id) {
    case InequalityId::kp:
      return katz_petrov_fraction(ctx, need().g);
    case InequalityId::osipov1:
      return osipov_fraction(ctx, 1.0);
    case InequalityId::osipov:
      return osipov_fraction(ctx, need().eps);
    case InequalityId::esseen:
      return esseen_classic_fraction(ctx);
    case InequalityId::esseen_bounded:
      return esseen_bounded_fraction(ctx);
    case InequalityId::rozovskii:
      return rozovskii_classic_fraction(ctx);
    case InequalityId::wang_ahmad:
      return wang_ahmad_fraction(ctx, need().g);
    case InequalityId::esseen_gamma: {
      const FractionParams& p = need();
      return esseen_fraction(ctx, {GFunction::identity(), p.eps, p.gamma}).value;
    }
    case InequalityId::rozovskii_gamma: {
      const FractionParams& p = need();
      return rozovskii_fraction(ctx, {GFunction::identity(), p.eps, p.gamma}).value;
    }
    case InequalityId::esseen_g: {
      const FractionParams& p = need();
      return esseen_fraction(ctx, {p.g, p.eps, 1.0}).value;
    }
    case InequalityId::rozovskii_g: {
      const FractionParams& p = need();
      return rozovskii_fraction(ctx, {p.g, p.eps, 1.0}).value;
    }
    case InequalityId::esseen_g_gamma:
      return esseen_fraction(ctx, need()).value;
    case InequalityId::rozovskii_g_gamma:
      return rozovskii_fraction(ctx, need()).value;
  }
  throw std::invalid_argument("unknown inequality");
}

BoundReport check_inequality(const SumContext& ctx, InequalityId id,
                             const std::optional<FractionParams>& params,
                             const DeltaEstimate& delta) {
  BoundReport r;
  r.inequality = std::string(to_string(id));
  r.ctx = ctx.describe();
  r.g = (params && inequality_needs_g(id)) ? params->g.describe() : "";
  r.eps = (params && inequality_needs_eps(id)) ? params->eps : kNaN;
  r.gamma = (params && inequality_needs_gamma(id)) ? params->gamma : kNaN;
  r.fraction_value = fraction_for(ctx, id, params);
  ConstantChoice c = constant_for(id, params ? params->eps : 0.0, params ? params->gamma : 0.0);
  r.constant_used = c.value;
  r.constant_source = c.source;
  r.delta_n = delta.delta;
  r.delta_uncertainty = delta.uncertainty;
  r.ratio = delta.delta / r.fraction_value;
  r.pass = delta.delta <= c.value * r.fraction_value + delta.uncertainty;
  return r;
}

BoundReport check_inequality(const SumContext& ctx, InequalityId id,
                             const std::optional<FractionParams>& params, double prune_tol) {
  return check_inequality(ctx, id, params, exact_delta(ctx, prune_tol));
}

A1LowerBound a1_lower_bound() {
  auto h = [](double x) { return std::fabs(1.0 / (1.0 + x * x) - normal_cdf(-x)); };
  double best_x = 1e-3, best_v = h(best_x);
  for (int i = 2; i <= 8000; ++i) {
    double x = i * 1e-3;
    double v = h(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  // golden-section refinement on the bracketing interval
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(best_x - 1e-3, 1e-9), b = best_x + 1e-3;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = h(c), fd = h(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = h(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = h(d);
    }
  }
  double x = 0.5 * (a + b);
  return {x, h(x)};
}

GammaStarConstants gamma_star_constants() {
  auto f = [](double x) {
    return 8.0 * (std::cos(x) - 1.0) + 8.0 * x * std::sin(x) - 4.0 * x * x * std::cos(x) -
           x * x * x * std::sin(x);
  };
  double a = std::acos(-1.0), b = 2.0 * a;
  double fa = f(a), fb = f(b);
  if (!(fa > 0.0) || !(fb < 0.0))
    throw RootNotBracketed("no sign change on (pi, 2pi); implementation error");
  while (b - a > 1e-12) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if (fm > 0.0)
      a = m;
    else
      b = m;
  }
  double x0 = 0.5 * (a + b);
  double c = std::cos(x0) - 1.0 + 0.5 * x0 * x0;
  double s = std::sin(x0) - x0;
  double kappa = std::sqrt(c * c + s * s) / (x0 * x0);
  double gamma_star = 1.0 / std::sqrt(6.0 * kappa);
  return {x0, kappa, gamma_star};
}

Theorem2Report theorem2_checks(const SumContext& ctx, double eps, double gamma) {
  Theorem2Report rep;
  GFunction g0 = GFunction::clip_above(ctx.bn());
  GFunction g1 = GFunction::clip_below(ctx.bn());

  FractionValue lhs = rozovskii_fraction(ctx, {g0, eps, gamma});
  double m_eps = third_moment_fraction(ctx, eps);
  SupResult szl = sup_zL(ctx, std::min(eps, 1.0));
  rep.eq_repr_lhs = lhs.value;
  rep.eq_repr_rhs = gamma / std::max(eps, 1.0) * std::fabs(m_eps) + szl.value;
  rep.eq_repr_ok = std::fabs(rep.eq_repr_lhs - rep.eq_repr_rhs) <=
                   1e-10 * std::max({std::fabs(rep.eq_repr_lhs), std::fabs(rep.eq_repr_rhs), 1e-300});

  FractionValue le = esseen_fraction(ctx, {g1, eps, gamma});
  rep.esseen_g1 = le.value;
  double up_e = std::max(eps, 1.0) * std::max(gamma, 1.0);
  rep.esseen_bounds_ok = le.value >= 1.0 && le.value <= up_e * (1.0 + 1e-12);

  FractionValue lr = rozovskii_fraction(ctx, {g1, eps, gamma});
  rep.rozovskii_g1 = lr.value;
  double up_r = std::max(eps, 1.0) * (gamma + 1.0);
  rep.rozovskii_bounds_ok = lr.value >= 1.0 && lr.value <= up_r * (1.0 + 1e-12);

  rep.degenerate_ok = true;
  if (eps <= 1.0 && gamma <= 1.0 && le.value != 1.0) rep.degenerate_ok = false;
  if (ctx.symmetric() && eps <= 1.0 && (le.value != 1.0 || lr.value != 1.0))
    rep.degenerate_ok = false;
  return rep;
}

namespace {

struct Family {
  int dims;
  // returns nullopt for parameter combinations outside the family
  std::optional<SumContext> (*build)(const std::vector<double>& p, int n);
  std::vector<std::vector<double>> coarse;           // coarse grid per dimension
  std::vector<std::pair<double, double>> box;        // refinement bounds
};

std::optional<SumContext> build_two_point(const std::vector<double>& p, int n) {
  double prob = p[0], scale = p[1];
  if (!(prob > 1e-6 && prob < 1.0 - 1e-6 && scale > 1e-6)) return std::nullopt;
  auto d = make_discrete({{-(1.0 - prob) * scale, prob}, {prob * scale, 1.0 - prob}});
  std::vector<DiscreteDistribution> summands(n, d);
  return SumContext::make(std::move(summands));
}

std::optional<SumContext> build_symmetric_two_point(const std::vector<double>& p, int n) {
  double scale = p[0];
  if (!(scale > 1e-6)) return std::nullopt;
  auto d = make_discrete({{-scale, 0.5}, {scale, 0.5}});
  std::vector<DiscreteDistribution> summands(n, d);
  return SumContext::make(std::move(summands));
}

std::optional<SumContext> build_three_point(const std::vector<double>& p, int n) {
  double a = p[0], b = p[1], pb = p[2];
  if (!(a > 1e-6 && b > 1e-6 && pb > 1e-6)) return std::nullopt;
  double pa = b * pb / a;
  double p0 = 1.0 - pa - pb;
  if (!(pa > 0.0) || p0 < 0.0) return std::nullopt;
  std::vector<Atom> atoms{{-a, pa}, {b, pb}};
  if (p0 > 0.0) atoms.push_back({0.0, p0});
  try {
    auto d = make_discrete(std::move(atoms));
    std::vector<DiscreteDistribution> summands(n, d);
    return SumContext::make(std::move(summands));
  } catch (const DistributionError&) {
    return std::nullopt;
  }
}

Family family_for(const std::string& name) {
  if (name == "two-point") {
    Family f;
    f.dims = 2;
    f.build = &build_two_point;
    f.coarse = {{0.002, 0.005, 0.01, 0.02, 0.04, 0.07, 0.12, 0.2, 0.3, 0.4, 0.5, 0.65, 0.8,
                 0.93, 0.98},
                {0.25, 1.0, 4.0}};
    f.box = {{1e-5, 1.0 - 1e-5}, {0.01, 32.0}};
    return f;
  }
  if (name == "three-point") {
    Family f;
    f.dims = 3;
    f.build = &build_three_point;
    f.coarse = {{0.25, 0.5, 1.0, 2.0, 4.0},
                {0.25, 0.5, 1.0, 2.0, 4.0},
                {0.05, 0.15, 0.3, 0.45}};
    f.box = {{0.01, 16.0}, {0.01, 16.0}, {1e-4, 0.6}};
    return f;
  }
  if (name == "symmetric-two-point") {
    Family f;
    f.dims = 1;
    f.build = &build_symmetric_two_point;
    f.coarse = {{0.25, 0.5, 1.0, 2.0, 4.0}};
    f.box = {{0.01, 16.0}};
    return f;
  }
  throw std::invalid_argument("unknown search family: " + name);
}

}  // namespace

SearchResult lower_bound_search(InequalityId id, const FamilySearchSpec& spec, long budget) {
  Family fam = family_for(spec.family);
  SearchResult result;

  auto objective = [&](const std::vector<double>& p) -> std::optional<double> {
    std::optional<SumContext> ctx = fam.build(p, spec.n);
    if (!ctx) return std::nullopt;
    ++result.evals;
    try {
      std::optional<FractionParams> params;
      if (inequality_needs_g(id) || inequality_needs_eps(id) || inequality_needs_gamma(id)) {
        GFunction g = spec.g_spec.empty() ? GFunction::identity()
                                          : parse_gfunction(spec.g_spec, ctx->bn());
        params = FractionParams{g, spec.eps, spec.gamma};
      }
      double fraction = fraction_for(*ctx, id, params);
      if (!(fraction > 0.0)) return std::nullopt;
      DeltaEstimate d = exact_delta(*ctx, 0.0);
      double ratio = d.delta / fraction;
      if (ratio > result.best_ratio) {
        result.best_ratio = ratio;
        result.best_ctx = ctx->describe();
        result.best_params = p;
      }
      return ratio;
    } catch (const SupportTooLarge&) {
      return std::nullopt;
    }
  };

  // coarse grid pass (always runs in full)
  std::vector<std::vector<double>> starts;
  std::vector<double> point(fam.dims);
  std::vector<size_t> idx(fam.dims, 0);
  std::vector<std::pair<double, std::vector<double>>> scored;
  for (;;) {
    for (int d = 0; d < fam.dims; ++d) point[d] = fam.coarse[d][idx[d]];
    if (auto v = objective(point)) scored.push_back({*v, point});
    int d = 0;
    while (d < fam.dims && ++idx[d] == fam.coarse[d].size()) idx[d++] = 0;
    if (d == fam.dims) break;
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = 0; i < scored.size() && i < 3; ++i) starts.push_back(scored[i].second);

  std::mt19937 rng(42);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> p(fam.dims);
    for (int d = 0; d < fam.dims; ++d) {
      std::uniform_real_distribution<double> u(fam.box[d].first, fam.box[d].second);
      p[d] = u(rng);
    }
    starts.push_back(p);
  }

  // compass refinement
  for (const auto& start : starts) {
    if (result.evals >= budget) break;
    std::vector<double> cur = start;
    auto cur_v = objective(cur);
    if (!cur_v) continue;
    std::vector<double> step(fam.dims);
    for (int d = 0; d < fam.dims; ++d)
      step[d] = 0.1 * (fam.box[d].second - fam.box[d].first);
    double min_step = 1e-7;
    while (result.evals < budget &&
           *std::max_element(step.begin(), step.end()) > min_step) {
      bool improved = false;
      for (int d = 0; d < fam.dims && result.evals < budget; ++d) {
        for (double sgn : {1.0, -1.0}) {
          std::vector<double> cand = cur;
          cand[d] = std::clamp(cand[d] + sgn * step[d], fam.box[d].first, fam.box[d].second);
          auto v = objective(cand);
          if (v && *v > *cur_v) {
            cur = cand;
            cur_v = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved)
        for (auto& s : step) s *= 0.5;
    }
  }
  return result;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LINDEBERG_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace lindelab
