#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "argsim/ancestral_fn.hpp"
#include "argsim/type_set.hpp"

namespace argsim {

/// Thrown when an operator is applied outside its domain (illegal event).
class IllegalEvent : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Merge of the lineages at ranks i1 < i2 (0-based).
struct Coalesce {
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  friend bool operator==(const Coalesce&, const Coalesce&) = default;
};

/// Split of lineage i (0-based rank) at locus u.
struct Recombine {
  std::size_t i = 0;
  double u = 0.0;
  friend bool operator==(const Recombine&, const Recombine&) = default;
};

using Event = std::variant<Coalesce, Recombine>;

/// Half-open active interval (b, e); empty when b >= e.
struct ActiveInterval {
  double begin = 0.0;
  double end = 0.0;
  bool empty() const { return !(begin < end); }
  bool contains(double u) const { return begin < u && u < end; }
};

/// Sorts lineages by first locus carrying material, then by smallest label
/// at that locus.
std::vector<AncestralFn> canonical_rank(std::vector<AncestralFn> lineages);

/// One instant of the back-in-time process: a finite set of ancestral
/// functions whose nonempty values partition {1..N} at every locus.
///
/// Lineages are kept in canonical rank order; all operators return new
/// states and leave `*this` untouched.
class State {
 public:
  /// Ranks `lineages` and drops identically-empty ones. Does not check the
  /// partition property (see check()).
  State(int n_samples, std::vector<AncestralFn> lineages);

  /// The initial state: N constant singleton lineages.
  static State initial(int n_samples);
  /// The absorbing state: one lineage carrying {1..N} everywhere.
  static State absorbing(int n_samples);

  int n_samples() const { return n_; }
  std::size_t size() const { return lineages_.size(); }
  const AncestralFn& lineage(std::size_t i) const { return lineages_.at(i); }
  const std::vector<AncestralFn>& lineages() const { return lineages_; }
  bool is_absorbing() const { return lineages_.size() == 1; }

  /// Empty string when the state is well-formed, otherwise a description of
  /// the first violated invariant.
  std::string check() const;

  /// (b_i, e_i). With `prefix_rule` false the first lineage uses the same
  /// definition as the others (only for mutation testing).
  ActiveInterval active_interval(std::size_t i, bool prefix_rule = true) const;

  State recombine(std::size_t i, double u, bool prefix_rule = true) const;
  State coalesce(std::size_t i1, std::size_t i2) const;
  State apply(const Event& ev, bool prefix_rule = true) const;

  /// Nonempty values at locus s, ordered by smallest label.
  std::vector<TypeSet> site_partition(double s) const;
  /// Replaces every lineage by its freeze at s and drops empty results.
  State project(double s) const;

  /// All discontinuity loci of the state's lineages, sorted.
  std::vector<double> breakpoints() const;
  /// Minimum gap between consecutive breakpoints including 0 and 1.
  double min_gap() const;

  /// One lineage per line, in rank order.
  std::string render() const;

  friend bool operator==(const State&, const State&) = default;

 private:
  int n_;
  std::vector<AncestralFn> lineages_;
};

/// True when u is strictly inside a run of material of f, i.e. the split
/// creates a new discontinuity and its locus is uniquely determined.
bool creates_breakpoint(const AncestralFn& f, double u);

std::string render_event(const Event& ev);

}  // namespace argsim
