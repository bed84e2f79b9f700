#include "lindelab/fractions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lindelab {

// The sup engine accumulates in long double so that exact mathematical ties at
// breakpoint limits stay within a fraction of a double ulp; a long double that
// is just double would let such ties round past the identities they pin.
static_assert(std::numeric_limits<long double>::digits >
                  std::numeric_limits<double>::digits,
              "extended-precision long double required");

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

size_t StepTable::segment_of(double w) const {
  return std::lower_bound(mags.begin(), mags.end(), w) - mags.begin();
}

double StepTable::tail2_at(double w) const {
  return static_cast<double>(tail2[segment_of(w)]);
}

double StepTable::below3_at(double w) const {
  return static_cast<double>(below3[segment_of(w)]);
}

StepTable build_step_table(std::span<const DiscreteDistribution> summands) {
  struct Entry {
    double mag;
    long double v2p, v3p;
  };
  std::vector<Entry> entries;
  for (const auto& d : summands) {
    for (const auto& a : d.atoms()) {
      if (a.value == 0.0) continue;
      long double v = a.value;
      long double v2 = v * v;
      entries.push_back({std::fabs(a.value), v2 * a.prob, v2 * v * a.prob});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.mag < y.mag; });
  StepTable t;
  for (const auto& e : entries) {
    if (!t.mags.empty() && t.mags.back() == e.mag) {
      t.tail2.back() += e.v2p;
      t.below3.back() += e.v3p;
    } else {
      t.mags.push_back(e.mag);
      t.tail2.push_back(e.v2p);   // per-class v^2 mass, turned into suffix sums below
      t.below3.push_back(e.v3p);  // per-class v^3 mass, turned into prefix sums below
    }
  }
  size_t m = t.mags.size();
  std::vector<long double> tail(m + 1, 0.0L), below(m + 1, 0.0L);
  for (size_t i = m; i-- > 0;) tail[i] = tail[i + 1] + t.tail2[i];
  for (size_t i = 0; i < m; ++i) below[i + 1] = below[i] + t.below3[i];
  t.tail2 = std::move(tail);
  t.below3 = std::move(below);
  return t;
}

SumContext SumContext::make(std::vector<DiscreteDistribution> summands) {
  if (summands.empty()) throw ContextError("context needs at least one summand");
  SumContext ctx;
  ctx.summands_ = std::move(summands);
  double bn2 = 0.0;
  for (const auto& d : ctx.summands_) bn2 += d.variance();
  if (!(bn2 > 0.0)) throw ContextError("context variance must be positive");
  ctx.bn2_ = bn2;
  ctx.bn_ = std::sqrt(bn2);
  ctx.bn3_ = bn2 * ctx.bn_;
  ctx.steps_ = build_step_table(ctx.summands_);
  for (double m : ctx.steps_.mags) {
    double b = m / ctx.bn_;
    if (ctx.breakpoints_.empty() || ctx.breakpoints_.back() != b) ctx.breakpoints_.push_back(b);
  }
  ctx.symmetric_ = std::all_of(ctx.summands_.begin(), ctx.summands_.end(),
                               [](const DiscreteDistribution& d) { return d.is_symmetric(); });
  return ctx;
}

std::string SumContext::describe() const {
  std::ostringstream os;
  size_t i = 0;
  while (i < summands_.size()) {
    std::string s = summands_[i].describe();
    size_t j = i;
    while (j < summands_.size() && summands_[j].describe() == s) ++j;
    if (i) os << " + ";
    if (j - i > 1) os << (j - i) << "x";
    os << s;
    i = j;
  }
  return os.str();
}

std::string_view to_string(SupApproach a) {
  switch (a) {
    case SupApproach::attained:
      return "attained";
    case SupApproach::from_left:
      return "from_left";
    case SupApproach::from_right:
      return "from_right";
  }
  return "?";
}

double lindeberg_fraction(const SumContext& ctx, double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("lindeberg_fraction needs z >= 0");
  double w = z * ctx.bn();
  double s = 0.0;
  for (const auto& d : ctx.summands()) s += d.truncated_second(w);
  return s / ctx.bn2();
}

double third_moment_fraction(const SumContext& ctx, double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("third_moment_fraction needs z >= 0");
  double w = z * ctx.bn();
  double s = 0.0;
  for (const auto& d : ctx.summands()) s += d.truncated_third_alg(w);
  return s / ctx.bn3();
}

double abs_third_fraction(const SumContext& ctx, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("abs_third_fraction needs eps > 0");
  double w = eps * ctx.bn();
  double s = 0.0;
  for (const auto& d : ctx.summands()) s += d.truncated_third_abs(w);
  return s / ctx.bn3();
}

double katz_petrov_fraction(const SumContext& ctx, const GFunction& g) {
  double s = 0.0;
  for (const auto& d : ctx.summands()) s += d.moment_g(g);
  return s / (ctx.bn2() * g.eval(ctx.bn()));
}

double osipov_fraction(const SumContext& ctx, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("osipov_fraction needs eps > 0");
  return lindeberg_fraction(ctx, eps) + abs_third_fraction(ctx, eps);
}

namespace {

struct RawSup {
  long double value = -kInf;
  double w = 0.0;
  SupApproach approach = SupApproach::attained;
  long double term_m = 0.0;
  long double term_s = 0.0;
};

// (u(w)/w) * (c1 + w*S) for a piece, at w > 0 inside its closure. The delta = 0
// and delta = 1 branches avoid pow() so that the clip/identity/constant kinds
// produce bit-identical values whenever their coefficients coincide. Extended
// precision keeps exact ties (the objective can equal the full-variance level
// at a breakpoint limit) within a quarter double-ulp, so downstream ratios
// that are identically 1 round to exactly 1.0.
void objective_at(const GPiece& p, long double c1, long double s2, double w,
                  long double* m_part, long double* s_part) {
  if (p.affine) {
    *m_part = (static_cast<long double>(p.a) + static_cast<long double>(p.b) / w) * c1;
    *s_part = (static_cast<long double>(p.a) * w + p.b) * s2;
  } else if (p.delta == 1.0) {
    *m_part = p.q * c1;
    *s_part = p.q * s2 * w;
  } else if (p.delta == 0.0) {
    *m_part = p.q * c1 / w;
    *s_part = p.q * s2;
  } else {
    *m_part = p.q * c1 * std::pow(static_cast<long double>(w), p.delta - 1.0L);
    *s_part = p.q * s2 * std::pow(static_cast<long double>(w), static_cast<long double>(p.delta));
  }
}

// Limit of the objective as w -> 0+; only reachable on the first segment,
// where the truncated third-moment sum is identically zero.
void objective_at_zero(const GPiece& p, long double s2, long double* m_part,
                       long double* s_part) {
  *m_part = 0.0;
  if (p.affine)
    *s_part = p.b * s2;
  else
    *s_part = (p.delta == 0.0) ? p.q * s2 : 0.0L;
}

// u(w) * S for the Rozovskii-style sup.
long double weighted_tail_at(const GPiece& p, long double s2, double w) {
  if (p.affine) return (static_cast<long double>(p.a) * w + p.b) * s2;
  if (p.delta == 1.0) return p.q * static_cast<long double>(w) * s2;
  if (p.delta == 0.0) return p.q * s2;
  return p.q * std::pow(static_cast<long double>(w), static_cast<long double>(p.delta)) * s2;
}

long double weighted_tail_at_zero(const GPiece& p, long double s2) {
  if (p.affine) return p.b * s2;
  return (p.delta == 0.0) ? p.q * s2 : 0.0L;
}

// Cut points partitioning (0, w_max) at step magnitudes and piece boundaries.
// The returned list ends with w_max itself (possibly +inf).
std::vector<double> make_cuts(const StepTable& t, const std::vector<GPiece>& pieces,
                              double w_max) {
  std::vector<double> cuts;
  cuts.reserve(t.mags.size() + pieces.size() + 1);
  for (double m : t.mags)
    if (m < w_max) cuts.push_back(m);
  for (const auto& p : pieces)
    if (p.hi > 0.0 && std::isfinite(p.hi) && p.hi < w_max) cuts.push_back(p.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(w_max);
  return cuts;
}

class BestTracker {
 public:
  void consider(double w, SupApproach ap, long double m_part, long double s_part) {
    long double v = m_part + s_part;
    bool better =
        v > best_.value || (v == best_.value && ap == SupApproach::attained &&
                            best_.approach != SupApproach::attained);
    if (better) best_ = {v, w, ap, m_part, s_part};
  }
  const RawSup& best() const { return best_; }

 private:
  RawSup best_;
};

// sup over w in (0, w_max) of (u(w)/w) * (gamma |A(w)| + w S(w)).
//
// On each interval between consecutive cut points both step sums are constant
// and u is a single power/affine piece, so the objective is
// c1 q w^{delta-1} + S q w^delta (or the affine analogue). For nonnegative
// coefficients any interior stationary point is a minimum, so the supremum
// over the interval is a one-sided limit at an endpoint; endpoints at step
// magnitudes are attained by left-continuity.
RawSup sup_weighted_objective(const StepTable& t, const std::vector<GPiece>& pieces,
                              double w_max, double gamma) {
  std::vector<double> cuts = make_cuts(t, pieces, w_max);
  BestTracker best;
  double lo = 0.0;
  size_t pi = 0;
  for (double hi : cuts) {
    if (!(lo < hi)) {
      lo = hi;
      continue;
    }
    while (pi + 1 < pieces.size() && pieces[pi].hi <= lo) ++pi;
    const GPiece& p = pieces[pi];
    size_t seg = std::upper_bound(t.mags.begin(), t.mags.end(), lo) - t.mags.begin();
    long double s2 = t.tail2[seg];
    long double c1 = gamma * std::fabs(t.below3[seg]);
    long double m_part, s_part;
    if (lo == 0.0) {
      objective_at_zero(p, s2, &m_part, &s_part);
      best.consider(0.0, SupApproach::from_right, m_part, s_part);
    } else {
      objective_at(p, c1, s2, lo, &m_part, &s_part);
      best.consider(lo, SupApproach::from_right, m_part, s_part);
    }
    if (std::isfinite(hi)) {
      objective_at(p, c1, s2, hi, &m_part, &s_part);
      best.consider(hi, hi < w_max ? SupApproach::attained : SupApproach::from_left, m_part,
                    s_part);
    }
    if (!p.affine && p.delta > 0.0 && p.delta < 1.0 && c1 > 0.0 && s2 > 0.0) {
      double w_st = static_cast<double>(c1 * (1.0L - p.delta) / (s2 * p.delta));
      if (w_st > lo && w_st < hi) {
        objective_at(p, c1, s2, w_st, &m_part, &s_part);
        best.consider(w_st, SupApproach::attained, m_part, s_part);
      }
    }
    lo = hi;
  }
  return best.best();
}

// sup over w in (0, w_max) of u(w) * S(w). u is non-decreasing for any valid
// weight function, so per interval the right endpoint dominates; the left
// endpoint is still considered to stay correct for tabulated weights that are
// monotone only up to the validation slack.
RawSup sup_weighted_tail(const StepTable& t, const std::vector<GPiece>& pieces, double w_max) {
  std::vector<double> cuts = make_cuts(t, pieces, w_max);
  BestTracker best;
  double lo = 0.0;
  size_t pi = 0;
  for (double hi : cuts) {
    if (!(lo < hi)) {
      lo = hi;
      continue;
    }
    while (pi + 1 < pieces.size() && pieces[pi].hi <= lo) ++pi;
    const GPiece& p = pieces[pi];
    size_t seg = std::upper_bound(t.mags.begin(), t.mags.end(), lo) - t.mags.begin();
    long double s2 = t.tail2[seg];
    if (lo == 0.0)
      best.consider(0.0, SupApproach::from_right, 0.0L, weighted_tail_at_zero(p, s2));
    else
      best.consider(lo, SupApproach::from_right, 0.0L, weighted_tail_at(p, s2, lo));
    if (std::isfinite(hi))
      best.consider(hi, hi < w_max ? SupApproach::attained : SupApproach::from_left, 0.0L,
                    weighted_tail_at(p, s2, hi));
    lo = hi;
  }
  return best.best();
}

double piece_value_at(const std::vector<GPiece>& pieces, double w) {
  for (const auto& p : pieces) {
    if (w > p.lo && w <= p.hi) {
      if (p.affine) return p.a * w + p.b;
      if (p.delta == 1.0) return p.q * w;
      if (p.delta == 0.0) return p.q;
      return p.q * std::pow(w, p.delta);
    }
  }
  throw ContextError("weight pieces do not cover the requested point");
}

std::vector<GPiece> identity_unit_pieces() {
  GPiece p;
  p.lo = 0.0;
  p.hi = kInf;
  p.affine = false;
  p.q = 1.0;
  p.delta = 1.0;
  return {p};
}

void check_params(const FractionParams& p, bool allow_inf_eps) {
  if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!allow_inf_eps && !std::isfinite(p.eps))
    throw std::invalid_argument("eps must be finite for the Rozovskii fraction");
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma))
    throw std::invalid_argument("gamma must be positive and finite");
}

}  // namespace

SupResult sup_zL(const SumContext& ctx, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("sup_zL needs eps > 0");
  RawSup raw = sup_weighted_tail(ctx.steps(), identity_unit_pieces(), eps * ctx.bn());
  return {static_cast<double>(raw.value / ctx.bn3()), raw.w / ctx.bn(), raw.approach};
}

FractionValue esseen_fraction(const SumContext& ctx, const FractionParams& p) {
  check_params(p, /*allow_inf_eps=*/true);
  std::vector<GPiece> pieces = p.g.normalized_pieces(ctx.bn());
  RawSup raw = sup_weighted_objective(ctx.steps(), pieces, p.eps * ctx.bn(), p.gamma);
  const long double denom = ctx.steps().tail2.front();
  FractionValue fv;
  fv.value = static_cast<double>(raw.value / denom);
  fv.m_term = static_cast<double>(raw.term_m / denom);
  fv.sup_term = static_cast<double>(raw.term_s / denom);
  fv.sup = {fv.value, raw.w / ctx.bn(), raw.approach};
  return fv;
}

FractionValue rozovskii_fraction(const SumContext& ctx, const FractionParams& p) {
  check_params(p, /*allow_inf_eps=*/false);
  std::vector<GPiece> pieces = p.g.normalized_pieces(ctx.bn());
  double w_eps = p.eps * ctx.bn();
  double m_abs = std::fabs(ctx.steps().below3_at(w_eps));
  double u_eps = piece_value_at(pieces, w_eps);
  FractionValue fv;
  fv.m_term = p.gamma * (u_eps / p.eps) * (m_abs / ctx.bn3());
  RawSup raw = sup_weighted_tail(ctx.steps(), pieces, w_eps);
  fv.sup_term = static_cast<double>(raw.value / ctx.steps().tail2.front());
  fv.value = fv.m_term + fv.sup_term;
  fv.sup = {fv.sup_term, raw.w / ctx.bn(), raw.approach};
  return fv;
}

double esseen_classic_fraction(const SumContext& ctx) {
  long double s = 0.0L;
  auto pieces = identity_unit_pieces();
  for (const auto& d : ctx.summands()) {
    StepTable t = build_step_table({&d, 1});
    s += sup_weighted_objective(t, pieces, kInf, 1.0).value;
  }
  return static_cast<double>(s / ctx.bn3());
}

double esseen_bounded_fraction(const SumContext& ctx) {
  long double s = 0.0L;
  auto pieces = identity_unit_pieces();
  for (const auto& d : ctx.summands()) {
    StepTable t = build_step_table({&d, 1});
    s += sup_weighted_objective(t, pieces, ctx.bn(), 1.0).value;
  }
  return static_cast<double>(s / ctx.bn3());
}

double rozovskii_classic_fraction(const SumContext& ctx) {
  long double s = 0.0L;
  auto pieces = identity_unit_pieces();
  for (const auto& d : ctx.summands()) {
    StepTable t = build_step_table({&d, 1});
    s += std::fabs(t.below3_at(ctx.bn())) + sup_weighted_tail(t, pieces, ctx.bn()).value;
  }
  return static_cast<double>(s / ctx.bn3());
}

double wang_ahmad_fraction(const SumContext& ctx, const GFunction& g) {
  std::vector<GPiece> pieces = g.normalized_pieces(ctx.bn());
  long double s = 0.0L;
  for (const auto& d : ctx.summands()) {
    StepTable t = build_step_table({&d, 1});
    s += sup_weighted_objective(t, pieces, kInf, 1.0).value;
  }
  return static_cast<double>(s / ctx.bn2());
}

}  // namespace lindelab
