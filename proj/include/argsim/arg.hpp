#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "argsim/state.hpp"

namespace argsim {

struct TimedEvent {
  double time = 0.0;
  Event event;
  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

/// One jump of a path: its time, the event, and the state it leads to.
struct ArgStep {
  double time = 0.0;
  Event event;
  State state;
};

/// A sample path: an initial state plus the ordered event log with the
/// state after each event. Construction does not validate; use
/// validate_arg().
class Arg {
 public:
  Arg(State initial, std::vector<ArgStep> steps) : initial_(std::move(initial)), steps_(std::move(steps)) {}

  /// Replays `events` from the initial state for N samples.
  /// Throws IllegalEvent if an event is outside its operator's domain.
  static Arg replay(int n_samples, std::span<const TimedEvent> events);

  int n_samples() const { return initial_.n_samples(); }
  const State& initial() const { return initial_; }
  const std::vector<ArgStep>& steps() const { return steps_; }
  std::size_t event_count() const { return steps_.size(); }
  const State& final_state() const { return steps_.empty() ? initial_ : steps_.back().state; }
  double final_time() const { return steps_.empty() ? 0.0 : steps_.back().time; }

  /// g(t): the state of the right-continuous path at time t.
  const State& state_at(double t) const;

  std::vector<TimedEvent> events() const;

 private:
  State initial_;
  std::vector<ArgStep> steps_;
};

/// One violated clause of the ARG-space membership conditions.
struct Violation {
  char clause = '?';  ///< 'a' initial, 'b' transition, 'c' distinct loci, 'd' terminal, 'e' times
  std::optional<std::size_t> event_index;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
  bool cites(char clause) const;
  std::string to_string() const;
};

/// Checks (a) initial state, (b) every transition is a legal operator
/// application producing the stored state, (c) locus-determining
/// recombination loci are pairwise distinct, (d) the path ends in the
/// absorbing state and (e) times are strictly increasing and positive.
ValidationReport validate_arg(const Arg& arg, bool prefix_rule = true);

/// As validate_arg, replaying an events-only log.
ValidationReport validate_events(int n_samples, std::span<const TimedEvent> events);

/// Order statistics of Bp(g) with the time each locus first appeared.
struct Breakpoints {
  std::vector<double> loci;
  std::vector<double> appearance_times;
};

/// Loci of all discontinuities along the path. Recombinations falling in an
/// empty gap of a lineage's material create none.
Breakpoints breakpoints(const Arg& arg);

/// Material vector (f(S_0), ..., f(S_m)) of one lineage.
using MaterialVector = std::vector<TypeSet>;

/// Material vectors of g(t) w.r.t. the given grid S_0 = 0 < S_1 < ... < S_m.
std::vector<MaterialVector> material_vectors(const State& x, std::span<const double> sites);
std::vector<MaterialVector> material_vectors(const Arg& arg, double t);
/// Rebuilds a state from material vectors and the grid (inverse of the above).
State state_from_vectors(int n_samples, std::span<const MaterialVector> vectors, std::span<const double> sites);

/// `sites` with a leading 0 prepended to `loci`.
std::vector<double> site_grid(std::span<const double> loci);

struct TreeLevel {
  double time = 0.0;
  std::vector<TypeSet> partition;
};

/// The coalescent tree at one locus, read off the path.
struct LocalTree {
  double site = 0.0;
  /// Distinct site partitions in time order, from singletons to {1..N}.
  std::vector<TreeLevel> levels;
  /// Time the site partition becomes {1..N} (site MRCA).
  double height = 0.0;
  /// Sum of branch lengths up to `height`.
  double tree_length = 0.0;
  /// First time the path projected on [0, site] has a single lineage.
  double beta = 0.0;
  /// Integral of the number of blocks over [0, beta): tree_length plus the
  /// single-lineage stretch from height to beta.
  double total_length = 0.0;
};

LocalTree local_tree(const Arg& arg, double site);

/// Newick string of a local tree: integer leaf labels, branch lengths in
/// coalescent units, smaller-leaf child first.
std::string to_newick(const LocalTree& tree);

/// A compressed state path (initial state plus jumps).
struct StatePath {
  State initial;
  std::vector<std::pair<double, State>> jumps;
  friend bool operator==(const StatePath&, const StatePath&) = default;
};

StatePath state_path(const Arg& arg);
/// The path projected on [0, s], with consecutive equal states merged.
StatePath project_arg(const Arg& arg, double s);
StatePath project_path(const StatePath& path, double s);

/// Per-replicate summary statistics.
struct SummaryStats {
  std::size_t breakpoint_count = 0;
  std::size_t event_count = 0;
  std::vector<double> sites;
  std::vector<double> tmrca_at;
  std::vector<double> length_at;
  std::vector<double> tree_length_at;
  double grand_mrca_time = 0.0;
  std::size_t max_lineages = 0;
};

SummaryStats summary(const Arg& arg, std::span<const double> sites);

/// FNV-1a 64-bit digest of the rendered post-event states.
std::uint64_t state_checksum(const Arg& arg);

}  // namespace argsim
