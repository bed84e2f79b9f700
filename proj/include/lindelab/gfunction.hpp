#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lindelab {

struct GDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct GSpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// One piece of a weight function normalized by an anchor: u(w) = g(w)/g(anchor)
/// for w in (lo, hi]. Either a power form u(w) = q * w^delta (delta in [0,1]) or
/// an affine form u(w) = a*w + b (tabulated functions).
struct GPiece {
  double lo = 0.0;
  double hi = 0.0;  // +inf for the last piece
  bool affine = false;
  double q = 0.0;
  double delta = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// A member of the class of increasing functions g: (0,inf) -> (0,inf) whose
/// ratio z/g(z) is also increasing (both in the wide sense). Built-in kinds are
/// members by construction; tabulated functions must be run through
/// validate_gclass before being trusted.
class GFunction {
 public:
  enum class Kind { identity, constant_one, power, clip_above, clip_below, scaled, tabulated };

  static GFunction identity();
  static GFunction constant_one();
  static GFunction power(double delta);                       // z^delta, delta in [0,1]
  static GFunction clip_above(double a);                      // min(z, a), a > 0
  static GFunction clip_below(double a);                      // max(z, a), a > 0
  static GFunction scaled(double c, GFunction inner);         // c * inner(z), c > 0
  static GFunction tabulated(std::vector<std::pair<double, double>> knots);

  Kind kind() const { return kind_; }

  /// Value at z > 0. Throws GDomainError for z <= 0 (g(0) is never evaluated;
  /// limits at 0+ are derived analytically from the piece decomposition).
  double eval(double z) const;

  /// Piecewise decomposition of g(w)/g(anchor) over (0, inf), with exact
  /// coefficients for the built-in kinds (scale factors cancel analytically).
  std::vector<GPiece> normalized_pieces(double anchor) const;

  /// Spec string that parses back to this function, e.g. "clip-above:0.5".
  std::string describe() const;

 private:
  GFunction() = default;

  Kind kind_ = Kind::identity;
  double param_ = 0.0;  // delta, clip point, or scale factor
  std::shared_ptr<const GFunction> inner_;
  std::vector<std::pair<double, double>> knots_;
};

/// Checks the two monotonicity requirements on consecutive grid points with
/// 1e-12 relative slack. Returns false on the first violating pair; if `why`
/// is given it receives a description of that pair.
bool validate_gclass(const GFunction& g, std::span<const double> grid, std::string* why = nullptr);

/// Two-sided envelope min{z/a,1} <= g(z)/g(a) <= max{z/a,1}, 1e-12 relative slack.
bool envelope_check(const GFunction& g, double a, double z);

/// Parses a CLI g-spec: "identity", "const", "power:d", "clip-above:a",
/// "clip-below:a", "scaled:c:<inner>", "tabulated:@file.json". The literal
/// clip point "B" resolves to `context_scale` (the B_n of the context at hand);
/// passing it without a scale is a GSpecError.
GFunction parse_gfunction(const std::string& spec, std::optional<double> context_scale = {});

}  // namespace lindelab
