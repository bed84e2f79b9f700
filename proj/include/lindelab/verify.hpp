#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lindelab/clt.hpp"
#include "lindelab/fractions.hpp"

namespace lindelab {

struct NoConstantAvailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RootNotBracketed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The thirteen checked inequalities. The *_gamma / *_g / *_g_gamma variants
/// are the balanced and weighted generalizations; the plain esseen/rozovskii
/// entries are the classical per-summand forms.
enum class InequalityId {
  kp,                 // Katz-Petrov second-moment bound, any weight g
  osipov1,            // L_n(1) + Lambda_n(1)
  osipov,             // L_n(eps) + Lambda_n(eps), any eps
  esseen,             // per-summand sup over z > 0
  esseen_bounded,     // per-summand sup over 0 < z < B_n
  rozovskii,          // per-summand split form
  wang_ahmad,         // per-summand g-weighted sup
  esseen_gamma,       // balanced, weight g_*
  rozovskii_gamma,    // balanced split, weight g_*
  esseen_g,           // weighted, gamma = 1
  rozovskii_g,        // weighted split, gamma = 1
  esseen_g_gamma,     // weighted and balanced
  rozovskii_g_gamma,  // weighted and balanced split
};

std::string_view to_string(InequalityId id);
std::optional<InequalityId> inequality_from_string(std::string_view name);
std::vector<InequalityId> all_inequalities();
bool inequality_needs_g(InequalityId id);
bool inequality_needs_eps(InequalityId id);
bool inequality_needs_gamma(InequalityId id);

/// Published constants used by the checks. Table entries are upper bounds for
/// the balanced-fraction constants at specific (eps, gamma); gamma_star rows
/// carry the computed root-based value. Read-only singleton.
struct ConstantsTable {
  double a1_upper = 1.87;         // Katz-Petrov / Osipov constant
  double a1_upper_iid_be = 0.4690;  // Berry-Esseen specialization, i.i.d.
  double a1_upper_be = 0.5583;      // Berry-Esseen specialization, general
  double a1_lower = 0.54093;
  double ae_1_1 = 2.73;   // bounds the per-summand bounded Esseen constant
  double ae_inf_1 = 2.66;  // bounds the per-summand unbounded Esseen constant
  double ar_1_1 = 2.73;    // bounds the per-summand Rozovskii constant
  double gamma_star = 0.0;  // filled from the root computation
  double kappa = 0.0;
  double x0 = 0.0;

  struct Entry {
    double eps;
    double gamma;
    double value;
  };
  std::vector<Entry> ae;  // balanced Esseen constants, decreasing in both arguments
  std::vector<Entry> ar;  // balanced Rozovskii constants, decreasing in gamma only
};
const ConstantsTable& constants();

struct ConstantChoice {
  double value;
  std::string source;  // which table entry / named constant backed the check
};

/// Constant valid for the given inequality at (eps, gamma). Esseen-side
/// lookups may use any table entry dominated by the request (the constants
/// decrease in both arguments); Rozovskii-side lookups require an exact-eps
/// row since those constants are only known to decrease in gamma. Throws
/// NoConstantAvailable when the tables cannot justify a constant.
ConstantChoice constant_for(InequalityId id, double eps = 0.0, double gamma = 0.0);

struct BoundReport {
  std::string inequality;
  std::string ctx;
  std::string g;  // empty when the inequality takes no weight function
  double eps;     // NaN when not applicable
  double gamma;   // NaN when not applicable
  double fraction_value;
  double constant_used;
  std::string constant_source;
  double delta_n;
  double delta_uncertainty;  // dropped convolution mass
  double ratio;              // delta_n / fraction_value
  bool pass;                 // delta_n <= constant * fraction + uncertainty
};

struct DeltaEstimate {
  double delta;
  double uncertainty;
};
DeltaEstimate exact_delta(const SumContext& ctx, double prune_tol = 0.0);

/// Fraction value entering the given inequality; params are required exactly
/// when the id takes (g, eps, gamma) arguments.
double fraction_for(const SumContext& ctx, InequalityId id,
                    const std::optional<FractionParams>& params);

BoundReport check_inequality(const SumContext& ctx, InequalityId id,
                             const std::optional<FractionParams>& params = {},
                             double prune_tol = 0.0);
BoundReport check_inequality(const SumContext& ctx, InequalityId id,
                             const std::optional<FractionParams>& params,
                             const DeltaEstimate& delta);

struct A1LowerBound {
  double x_star;
  double value;
};
/// Maximizes |1/(1+x^2) - Phi(-x)| over x > 0 (coarse scan + golden section,
/// 1e-10 argument tolerance). Deterministic.
A1LowerBound a1_lower_bound();

struct GammaStarConstants {
  double x0;
  double kappa;
  double gamma_star;
};
/// Root of 8(cos x - 1) + 8x sin x - 4x^2 cos x - x^3 sin x on (pi, 2pi) by
/// bisection to 1e-12, then kappa and gamma_star = 1/sqrt(6 kappa) from it.
GammaStarConstants gamma_star_constants();

/// Identity and two-sided-bound checks for the extremal weights:
///   representation of the split fraction at g_0 against its reduced form,
///   1 <= esseen(g_1) <= max(eps,1) max(gamma,1),
///   1 <= rozovskii(g_1) <= max(eps,1) (gamma+1),
///   esseen(g_1) == 1 for eps <= 1, gamma <= 1,
///   both == 1 for symmetric contexts with eps <= 1 (any gamma).
struct Theorem2Report {
  double eq_repr_lhs, eq_repr_rhs;
  bool eq_repr_ok;
  double esseen_g1;
  bool esseen_bounds_ok;
  double rozovskii_g1;
  bool rozovskii_bounds_ok;
  bool degenerate_ok;
  bool pass() const {
    return eq_repr_ok && esseen_bounds_ok && rozovskii_bounds_ok && degenerate_ok;
  }
};
Theorem2Report theorem2_checks(const SumContext& ctx, double eps, double gamma);

struct FamilySearchSpec {
  std::string family = "two-point";  // "two-point" or "three-point"
  int n = 1;
  std::string g_spec;  // resolved against each candidate context ("B" allowed)
  double eps = 1.0;
  double gamma = 1.0;
};
struct SearchResult {
  double best_ratio = 0.0;
  std::string best_ctx;
  std::vector<double> best_params;
  long evals = 0;
};
/// Derivative-free maximization of delta_n / fraction over a context family:
/// coarse grid (always evaluated), then compass refinement from the best grid
/// cells plus fixed-seed random restarts, stopping at the evaluation budget.
/// The result is a certified lower bound on the inequality constant, never
/// claimed optimal.
SearchResult lower_bound_search(InequalityId id, const FamilySearchSpec& spec, long budget);

/// Worker count for corpus runs: explicit argument if > 0, else the
/// LINDEBERG_LAB_THREADS environment cap, else hardware concurrency.
int worker_count(int requested = 0);

}  // namespace lindelab
