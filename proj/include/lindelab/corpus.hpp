#pragma once

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lindelab/verify.hpp"

namespace lindelab {

/// One family of contexts with its parameter grids. Unused grids stay empty.
struct FamilyGrid {
  std::string name;       // two_point | symmetric_two_point | three_point |
                          // symmetric_three_point | mixture
  std::vector<double> p;  // mass parameter grid
  std::vector<double> s;  // scale grid
  std::vector<double> a;  // left/right magnitude grids (three-point)
  std::vector<double> b;
};

struct CorpusSpec {
  std::vector<FamilyGrid> families;
  std::vector<int> n_values{1, 2, 4};
  double prune_tol = 0.0;
  std::vector<std::string> g_specs{"identity", "clip-above:B", "clip-below:B", "power:0.5"};
  std::vector<double> esseen_eps{1.0, 2.5, std::numeric_limits<double>::infinity()};
  std::vector<double> rozovskii_eps{0.5, 1.0, 3.0};
  std::vector<double> gamma_grid{0.72, 1.0, 4.0};
};

/// The built-in corpus used by `verify`: all families at moderate grids,
/// n in {1, 2, 4}, > 1000 inequality checks.
CorpusSpec default_corpus();

/// Denser family grids (no inequality params), >= 200 contexts; used by the
/// identity/property suites.
CorpusSpec identity_suite_corpus();

std::vector<SumContext> build_contexts(const CorpusSpec& spec);

CorpusSpec load_corpus_spec(const std::string& path);

struct CorpusSummary {
  size_t total = 0;
  size_t failures = 0;
  std::map<std::string, double> max_ratio;  // per inequality id
};

struct CorpusResult {
  std::vector<BoundReport> reports;  // failures first
  CorpusSummary summary;
};

/// Runs every applicable (inequality, params) combination from the spec over
/// every context, convolving each context once. Contexts are checked in
/// parallel; reports land in preallocated slots so the output order is
/// deterministic. Throws NoConstantAvailable if the spec requests a
/// combination the constant tables cannot back.
CorpusResult run_corpus(const CorpusSpec& spec, const std::vector<InequalityId>& ids,
                        int threads = 0);

struct SuiteResult {
  size_t checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Extremal-weight identity checks over ctxs x eps_grid x gamma_grid.
SuiteResult run_theorem2_suite(std::span<const SumContext> ctxs,
                               std::span<const double> eps_grid,
                               std::span<const double> gamma_grid, int threads = 0);

/// Moment/fraction invariants: Lambda_n(eps) <= eps, |M_n| <= Lambda_n, the
/// truncated-second-moment infimum at eps = 1, scale invariance, the
/// g0 <= g <= g1 sandwich, and the eps <= 1 reductions to the unweighted
/// forms, over the default weight list (including a validated tabulated g).
SuiteResult run_property_suite(std::span<const SumContext> ctxs, int threads = 0);

/// The seven weight functions exercised by the property suite.
std::vector<GFunction> property_suite_weights(double bn);

}  // namespace lindelab
