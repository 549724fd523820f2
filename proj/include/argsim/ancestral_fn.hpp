#pragma once

#include <string>
#include <vector>

#include "argsim/type_set.hpp"

namespace argsim {

/// Right-continuous piecewise-constant TypeSet-valued function on [0, 1).
///
/// Stored in canonical form: `cuts` are the true discontinuities
/// a_1 < ... < a_m in (0, 1) and `values[k]` is the value on [a_k, a_{k+1})
/// with a_0 = 0 and a_{m+1} = 1. Adjacent values always differ, so two
/// functions are equal iff their representations are equal.
class AncestralFn {
 public:
  /// Identically empty function.
  AncestralFn() : values_{TypeSet{}} {}

  /// Constant function on [0, 1).
  explicit AncestralFn(TypeSet value) : values_{value} {}

  /// Builds from a (not necessarily canonical) step description.
  /// `cuts` must be strictly increasing inside (0, 1) and
  /// values.size() == cuts.size() + 1. Equal neighbours are merged.
  AncestralFn(std::vector<double> cuts, std::vector<TypeSet> values);

  const std::vector<double>& cuts() const { return cuts_; }
  const std::vector<TypeSet>& values() const { return values_; }

  /// f(s) for s in [0, 1).
  TypeSet at(double s) const;
  /// Value on the run immediately left of u (u in (0, 1]).
  TypeSet left_of(double u) const;

  bool is_empty() const;
  /// min{s : f(s) != empty}; 1 for the empty function.
  double first_nonempty() const;
  /// inf{u : f = empty on (u, 1)} ^ 1.
  double support_end() const;
  /// inf{u : f(u) != value}; 1 if f == value everywhere.
  double first_differing(TypeSet value) const;

  /// f^{(u-)}: f left of u, empty from u on.
  AncestralFn left_part(double u) const;
  /// f^{(u+)}: empty left of u, f from u on.
  AncestralFn right_part(double u) const;
  /// f^s: f left of s, frozen at f(s) from s on.
  AncestralFn frozen_at(double s) const;

  /// Pointwise union.
  friend AncestralFn join(const AncestralFn& f, const AncestralFn& h);

  /// `[0,v_0 | a_1,v_1 | ...]` with loci at 17 significant digits.
  std::string render() const;

  friend bool operator==(const AncestralFn&, const AncestralFn&) = default;

 private:
  void normalize();

  std::vector<double> cuts_;
  std::vector<TypeSet> values_;
};

/// Lebesgue measure of {s in [0, 1) : f(s) != h(s)}.
double distance_dL(const AncestralFn& f, const AncestralFn& h);

/// Locus formatting shared by renderings and logs (17 significant digits).
std::string format_locus(double x);

}  // namespace argsim
