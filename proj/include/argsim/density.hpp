#pragma once

#include <string>
#include <string_view>

namespace argsim {

/// Distribution of recombination breakpoints on (0, 1): uniform or Beta(a, b).
class BreakpointDensity {
 public:
  enum class Kind { Uniform, Beta };

  BreakpointDensity() = default;
  static BreakpointDensity uniform() { return {}; }
  static BreakpointDensity beta(double alpha, double beta);

  /// "uniform" or "beta:a,b".
  static BreakpointDensity parse(std::string_view spec);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta_param() const { return beta_; }

  double pdf(double s) const;
  double cdf(double s) const;
  /// Probability mass of (lo, hi).
  double mass(double lo, double hi) const;
  /// Smallest s with cdf(s) >= q, q in [0, 1].
  double inverse_cdf(double q) const;
  /// Inverse CDF of the density restricted and renormalized to (lo, hi),
  /// evaluated at v in (0, 1). The result lies strictly inside (lo, hi)
  /// whenever the interval has positive mass and positive width.
  double truncated_inverse(double lo, double hi, double v) const;

  friend bool operator==(const BreakpointDensity&, const BreakpointDensity&) = default;

 private:
  Kind kind_ = Kind::Uniform;
  double alpha_ = 1.0;
  double beta_ = 1.0;
};

}  // namespace argsim
