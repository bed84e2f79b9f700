#include "lindelab/clt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lindelab {

namespace {

constexpr size_t kSupportCap = 10'000'000;

void merge_sorted_equal_values(std::vector<Atom>& atoms) {
  size_t out = 0;
  for (size_t i = 0; i < atoms.size();) {
    Atom merged = atoms[i];
    size_t j = i + 1;
    while (j < atoms.size() && atoms[j].value == merged.value) {
      merged.prob += atoms[j].prob;
      ++j;
    }
    atoms[out++] = merged;
    i = j;
  }
  atoms.resize(out);
}

}  // namespace

SumDistribution convolve(const SumContext& ctx, double prune_tol) {
  if (!(prune_tol >= 0.0)) throw std::invalid_argument("prune_tol must be >= 0");
  std::vector<const DiscreteDistribution*> order;
  order.reserve(ctx.summands().size());
  for (const auto& d : ctx.summands()) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(),
                   [](const DiscreteDistribution* a, const DiscreteDistribution* b) {
                     return a->atoms().size() < b->atoms().size();
                   });

  std::vector<Atom> acc{{0.0, 1.0}};
  double dropped = 0.0;
  for (const DiscreteDistribution* d : order) {
    size_t projected = acc.size() * d->atoms().size();
    if (projected > kSupportCap) {
      std::ostringstream os;
      os << "convolution support would reach " << projected << " atoms (cap " << kSupportCap
         << ")";
      throw SupportTooLarge(os.str());
    }
    std::vector<Atom> next;
    next.reserve(projected);
    for (const auto& a : acc)
      for (const auto& b : d->atoms()) next.push_back({a.value + b.value, a.prob * b.prob});
    std::sort(next.begin(), next.end(),
              [](const Atom& x, const Atom& y) { return x.value < y.value; });
    merge_sorted_equal_values(next);
    if (prune_tol > 0.0) {
      size_t out = 0;
      for (const auto& a : next) {
        if (a.prob < prune_tol)
          dropped += a.prob;
        else
          next[out++] = a;
      }
      next.resize(out);
    }
    acc = std::move(next);
  }
  for (auto& a : acc) a.value /= ctx.bn();
  // Distinct raw sums can land on the same double after scaling.
  merge_sorted_equal_values(acc);
  return {std::move(acc), dropped};
}

// Hart (1968) algorithm 5666 rational approximation for the normal CDF, in the
// Alan Miller NORMP arrangement; documented accuracy 1e-15.
double normal_cdf(double x) {
  static constexpr double p0 = 220.2068679123761;
  static constexpr double p1 = 221.2135961699311;
  static constexpr double p2 = 112.0792914978709;
  static constexpr double p3 = 33.91286607838300;
  static constexpr double p4 = 6.373962203531650;
  static constexpr double p5 = 0.7003830644436881;
  static constexpr double p6 = 0.03526249659989109;
  static constexpr double q0 = 440.4137358247522;
  static constexpr double q1 = 793.8265125199484;
  static constexpr double q2 = 637.3336333788311;
  static constexpr double q3 = 296.5642487796737;
  static constexpr double q4 = 86.78073220294608;
  static constexpr double q5 = 16.06417757920695;
  static constexpr double q6 = 1.755667163182642;
  static constexpr double q7 = 0.08838834764831844;
  static constexpr double cutoff = 7.071;
  static constexpr double root2pi = 2.506628274631001;

  double zabs = std::fabs(x);
  if (zabs > 37.0) return x > 0.0 ? 1.0 : 0.0;
  double expntl = std::exp(-0.5 * zabs * zabs);
  double p;
  if (zabs < cutoff) {
    p = expntl *
        ((((((p6 * zabs + p5) * zabs + p4) * zabs + p3) * zabs + p2) * zabs + p1) * zabs + p0) /
        (((((((q7 * zabs + q6) * zabs + q5) * zabs + q4) * zabs + q3) * zabs + q2) * zabs + q1) *
             zabs +
         q0);
  } else {
    p = expntl / root2pi /
        (zabs + 1.0 / (zabs + 2.0 / (zabs + 3.0 / (zabs + 4.0 / (zabs + 0.65)))));
  }
  return x > 0.0 ? 1.0 - p : p;
}

double kolmogorov_delta(const SumDistribution& s) {
  double delta = 0.0;
  double cum = 0.0;
  for (const auto& a : s.atoms) {
    double phi = normal_cdf(a.value);
    delta = std::max(delta, std::fabs(cum - phi));  // F(a) = P(S < a), left limit
    cum += a.prob;
    delta = std::max(delta, std::fabs(cum - phi));  // F(a+)
  }
  return delta;
}

}  // namespace lindelab
