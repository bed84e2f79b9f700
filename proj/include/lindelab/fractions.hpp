#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lindelab/distribution.hpp"
#include "lindelab/gfunction.hpp"

namespace lindelab {

struct ContextError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pooled step representation of the truncated-moment sums of a set of
/// summands, in raw (unnormalized) argument space. With magnitudes
/// m_1 < ... < m_M (of the nonzero atom values), segment i = 0..M covers
/// (m_i, m_{i+1}] where m_0 := 0 and m_{M+1} := +inf, and on segment i
///   tail2[i]  = sum over |v| >= w of v^2 p   (constant there)
///   below3[i] = sum over |v| <  w of v^3 p   (constant there)
/// Both sums are left-continuous step functions of w; the boundary atom at a
/// magnitude belongs to the tail sum and is excluded from the truncated one.
///
/// Sums are carried in extended precision, and the suprema built from them are
/// normalized by tail2[0] (the same accumulation chain) rather than by the
/// double-rounded context variance: at breakpoint limits the objective can tie
/// the full-mass level exactly (the third-moment gain cancels the tail loss),
/// and identities that pin such suprema to 1 must survive the rounding of the
/// tie.
struct StepTable {
  std::vector<double> mags;
  std::vector<long double> tail2;   // size mags+1, tail2 back is 0
  std::vector<long double> below3;  // size mags+1, below3 front is 0

  size_t segment_of(double w) const;  // number of magnitudes strictly below w
  double tail2_at(double w) const;
  double below3_at(double w) const;
};

StepTable build_step_table(std::span<const DiscreteDistribution> summands);

/// An independent collection of zero-mean discrete summands with positive
/// total variance. Immutable; fraction evaluations are pure functions of it.
class SumContext {
 public:
  static SumContext make(std::vector<DiscreteDistribution> summands);

  const std::vector<DiscreteDistribution>& summands() const { return summands_; }
  double bn2() const { return bn2_; }
  double bn() const { return bn_; }
  double bn3() const { return bn3_; }
  /// Distinct |value|/B_n over all nonzero atoms, strictly ascending.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const StepTable& steps() const { return steps_; }
  bool symmetric() const { return symmetric_; }
  std::string describe() const;

 private:
  SumContext() = default;
  std::vector<DiscreteDistribution> summands_;
  double bn2_ = 0.0, bn_ = 0.0, bn3_ = 0.0;
  std::vector<double> breakpoints_;
  StepTable steps_;
  bool symmetric_ = false;
};

/// How a supremum witness is reached. Suprema are taken over open intervals,
/// so a witness may be a one-sided limit rather than an attained point.
enum class SupApproach { attained, from_left, from_right };
std::string_view to_string(SupApproach a);

struct SupResult {
  double value;
  double z;  // witness in normalized units (argument of L_n / M_n)
  SupApproach approach;
};

struct FractionParams {
  GFunction g;
  double eps;    // +inf allowed for the Esseen form
  double gamma;  // > 0
};

struct FractionValue {
  double value;
  double m_term;    // gamma-weighted third-moment component
  double sup_term;  // Lindeberg component
  SupResult sup;    // witness of the supremum part
};

/// L_n(z) = (1/B_n^2) sum_k E X_k^2 1(|X_k| >= z B_n); equals 1 at z = 0,
/// non-increasing and left-continuous in z.
double lindeberg_fraction(const SumContext& ctx, double z);

/// M_n(z) = (1/B_n^3) sum_k E X_k^3 1(|X_k| < z B_n). Signed.
double third_moment_fraction(const SumContext& ctx, double z);

/// Lambda_n(eps) = (1/B_n^3) sum_k E |X_k|^3 1(|X_k| < eps B_n). Always <= eps.
double abs_third_fraction(const SumContext& ctx, double eps);

/// (1/(B_n^2 g(B_n))) sum_k E X_k^2 g(|X_k|).
double katz_petrov_fraction(const SumContext& ctx, const GFunction& g);

/// L_n(eps) + Lambda_n(eps); minimized over eps at eps = 1.
double osipov_fraction(const SumContext& ctx, double eps);

/// Exact sup of z L_n(z) over the open interval (0, eps), with witness.
/// Computed by finite enumeration of the step breakpoints.
SupResult sup_zL(const SumContext& ctx, double eps);

/// sup over z in (0, eps) of (g(z B_n)/(z g(B_n))) (gamma |M_n(z)| + z L_n(z)),
/// evaluated exactly via the per-segment closed forms. eps may be +inf.
FractionValue esseen_fraction(const SumContext& ctx, const FractionParams& p);

/// gamma (g(eps B_n)/(eps g(B_n))) |M_n(eps)|
///   + sup over z in (0, eps) of (g(z B_n)/g(B_n)) L_n(z).  eps must be finite.
FractionValue rozovskii_fraction(const SumContext& ctx, const FractionParams& p);

/// (1/B_n^3) sum_k sup_{z > 0} { |mu_k(z)| + z sigma_k^2(z) }  (per-summand sup).
double esseen_classic_fraction(const SumContext& ctx);

/// Same with the sup restricted to z in (0, B_n).
double esseen_bounded_fraction(const SumContext& ctx);

/// (1/B_n^3) sum_k { |mu_k(B_n)| + sup_{0 < z < B_n} z sigma_k^2(z) }.
double rozovskii_classic_fraction(const SumContext& ctx);

/// (1/(B_n^2 g(B_n))) sum_k sup_{z > 0} (g(z)/z) { |mu_k(z)| + z sigma_k^2(z) }.
double wang_ahmad_fraction(const SumContext& ctx, const GFunction& g);

}  // namespace lindelab
