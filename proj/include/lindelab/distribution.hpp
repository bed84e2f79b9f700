#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lindelab/gfunction.hpp"

namespace lindelab {

struct DistributionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyAtomList : DistributionError {
  EmptyAtomList() : DistributionError("distribution has no atoms") {}
};
struct NonUnitMass : DistributionError {
  using DistributionError::DistributionError;
};
struct NonZeroMean : DistributionError {
  using DistributionError::DistributionError;
};

struct Atom {
  double value;
  double prob;
};

/// A zero-mean random variable with finitely many atoms. Atoms are sorted
/// ascending by value and pairwise distinct; equal raw values are merged at
/// construction by exact bit equality. Immutable after construction.
///
/// Truncation conventions (fixed throughout the library):
///   tail second moment  E X^2 1(|X| >= z)   -- boundary atoms belong to the tail
///   truncated third     E X^3 1(|X| <  z)   -- boundary atoms are excluded
class DiscreteDistribution {
 public:
  const std::vector<Atom>& atoms() const { return atoms_; }
  double variance() const { return variance_; }

  /// E X^2 1(|X| >= z), z >= 0.
  double truncated_second(double z) const;
  /// E X^3 1(|X| < z), z >= 0. Signed; vanishes identically for symmetric laws.
  double truncated_third_alg(double z) const;
  /// E |X|^3 1(|X| < z), z >= 0.
  double truncated_third_abs(double z) const;
  /// E X^2 g(|X|). Atoms at zero contribute nothing, so g(0) is never evaluated.
  double moment_g(const GFunction& g) const;

  bool is_point_mass_at_zero() const;
  /// True iff every atom (v, p) has a mirror (-v, p) with identical probability.
  bool is_symmetric() const;

  std::string describe() const;

  friend DiscreteDistribution make_discrete(std::vector<Atom> raw_atoms);

 private:
  DiscreteDistribution(std::vector<Atom> atoms, double variance)
      : atoms_(std::move(atoms)), variance_(variance) {}

  std::vector<Atom> atoms_;
  double variance_;
};

/// Validates, merges equal values, sorts, and checks unit mass (1e-12 absolute)
/// and zero mean (1e-12 relative to E|X|).
DiscreteDistribution make_discrete(std::vector<Atom> raw_atoms);

/// Reads {"atoms": [[value, prob], ...]} ; values and probs may be JSON numbers
/// or decimal strings.
DiscreteDistribution load_distribution(const std::string& path);

}  // namespace lindelab
