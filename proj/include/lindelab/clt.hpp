#pragma once

#include <stdexcept>
#include <vector>

#include "lindelab/fractions.hpp"

namespace lindelab {

struct SupportTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact atom list of the normalized sum S_n / B_n; sorted strictly ascending.
/// dropped_mass is the total probability pruned during convolution and must be
/// added as an uncertainty to anything derived from the atoms.
struct SumDistribution {
  std::vector<Atom> atoms;
  double dropped_mass = 0.0;
};

/// Exact distribution of sum_k X_k / B_n by sequential pairwise convolution.
/// Summands are convolved smallest support first; equal sums merge by exact
/// value equality (normalization by B_n happens once, after all additions).
/// Atoms with probability < prune_tol are dropped into dropped_mass.
/// Throws SupportTooLarge if a step would exceed 1e7 atoms before merging.
SumDistribution convolve(const SumContext& ctx, double prune_tol = 0.0);

/// Standard normal CDF, absolute error below 1e-14 on |x| <= 8; saturates to
/// 0/1 beyond |x| = 37.
double normal_cdf(double x);

/// sup_x |F(x) - Phi(x)| where F(x) = P(S < x). For a discrete F the supremum
/// is attained at an atom from one side or the other, so both one-sided
/// discrepancies are evaluated at every atom. dropped_mass is not folded in.
double kolmogorov_delta(const SumDistribution& s);

}  // namespace lindelab
