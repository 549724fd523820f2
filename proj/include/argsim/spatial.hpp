#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "argsim/arg.hpp"
#include "argsim/backintime.hpp"
#include "argsim/density.hpp"
#include "argsim/rng.hpp"

namespace argsim::spatial {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class NodeKind { Leaf, Coalescence, Recombination };

/// A vertex of the partial graph.
///
/// Leaf: one edge above. Coalescence: two below, one above.
/// Recombination: one below and two above, `above[0]` keeping the loci left
/// of `locus` and `above[1]` (the larger label) keeping the rest.
struct Node {
  int id = -1;
  NodeKind kind = NodeKind::Leaf;
  double latitude = 0.0;
  std::vector<int> below;
  std::vector<int> above;
  /// Recombination only: above[1] carries material columns >= split_column.
  std::size_t split_column = 0;
  /// Recombination only: the locus of the split. For splits inside a gap of
  /// material this is a representative locus inside the gap.
  double locus = 0.0;
};

/// An edge of the partial graph, spanning latitudes [lo, hi).
struct Branch {
  int id = -1;
  /// Largest k such that the branch lies on the local tree at S_k.
  std::size_t label = 0;
  double lo = 0.0;
  double hi = kInfinity;
  /// (z_0, ..., z_i): ancestral material between consecutive breakpoints.
  MaterialVector material;
  int lower_node = -1;
  int upper_node = -1;  ///< -1 for the top lineage
};

/// Number of graph lineages alive on each latitude interval.
struct LatitudeProfile {
  /// Change points, ascending; latitudes[0] == 0.
  std::vector<double> latitudes;
  /// counts[k] lineages on [latitudes[k], latitudes[k+1]); the last entry
  /// holds up to infinity.
  std::vector<int> counts;

  int count_at(double t) const;
  /// Integral of the lineage count over [from, to].
  double integral(double from, double to) const;
};

struct TraceState;

/// Branch-and-latitude representation of the path projected on [0, S_i].
class PartialGraph {
 public:
  /// Kingman coalescent tree at locus 0.
  static PartialGraph kingman(int n_samples, Rng& rng);

  struct Merge {
    double time;
    TypeSet a;
    TypeSet b;
  };
  /// Kingman-shaped graph from an explicit merge list (test fixtures).
  /// Each merge joins the two current subtrees with leaf sets a and b.
  static PartialGraph from_merges(int n_samples, std::span<const Merge> merges);

  int n_samples() const { return n_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Branch& branch(int id) const { return branches_.at(static_cast<std::size_t>(id)); }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

  /// S_0 = 0, S_1, ..., S_i.
  const std::vector<double>& sites() const { return sites_; }
  std::size_t current_index() const { return sites_.size() - 1; }
  double current_site() const { return sites_.back(); }

  int top_branch() const { return top_; }
  /// Latitude at which the graph first has a single lineage.
  double grand_mrca() const { return branch(top_).lo; }
  /// Length of the current local tree below grand_mrca().
  double local_length() const;
  /// Branches of the current local tree, in id order.
  std::vector<int> local_tree_branches() const;

  /// Branches spanning latitude t (lo <= t < hi), in id order.
  std::vector<int> live_at(double t) const;
  LatitudeProfile profile() const;

  /// Empty when structural invariants hold, else the first violation.
  std::string check() const;

  /// Number of coalescence and recombination nodes.
  std::size_t event_count() const { return nodes_.size() - static_cast<std::size_t>(n_); }

  /// Emits the graph's nodes in latitude order as an event path, rebuilding
  /// every state from the material vectors and cross-checking it against
  /// the operator applied to the previous state.
  Arg to_arg() const;

 private:
  friend void accept_breakpoint(PartialGraph& graph, double next_site, const TraceState& trace);

  explicit PartialGraph(int n) : n_(n), sites_{0.0} {}
  /// Cuts branch b at latitude t; the upper piece gets a fresh id and keeps
  /// b's upper node. Returns the upper piece; the caller wires the new node.
  int split_branch(int b, double t, int node_id);
  int add_node(NodeKind kind, double latitude);
  int add_branch(double lo, MaterialVector material, std::size_t label, int lower_node);
  void refresh_top();

  int n_;
  std::vector<double> sites_;
  std::vector<Branch> branches_;
  std::vector<Node> nodes_;
  int top_ = -1;
};

/// Survival function of the next breakpoint: P(S_{i+1} > s) for s < 1.
double next_breakpoint_survival(double local_length, double current_site, double s, double rho,
                                const BreakpointDensity& density);

/// Breakpoint for a given uniform u in (0, 1): 1 when u is at most the atom
/// mass, else the s solving survival(s) = u.
double next_breakpoint_quantile(double local_length, double current_site, double rho,
                                const BreakpointDensity& density, double u);

/// Draws S_{i+1} in (S_i, 1]; 1 means no further breakpoint.
double sample_next_breakpoint(double local_length, double current_site, double rho,
                              const BreakpointDensity& density, Rng& rng);
double sample_next_breakpoint(const PartialGraph& graph, double rho, const BreakpointDensity& density, Rng& rng);

struct TreeLocation {
  int branch = -1;
  double latitude = 0.0;
};

/// Maps x in [0, L) to a point of the local tree by walking its branches in
/// id order.
TreeLocation locate_on_tree(const PartialGraph& graph, double x);
/// Uniform point of the local tree (length measure).
TreeLocation sample_recomb_location(const PartialGraph& graph, Rng& rng);

/// First coalescence latitude of a free lineage starting at `from`, with
/// rate equal to the number of live graph lineages.
double sample_free_coalescence(const LatitudeProfile& profile, double from, Rng& rng);
/// CDF of sample_free_coalescence: 1 - exp(-integral of the count).
double free_coalescence_cdf(const LatitudeProfile& profile, double from, double t);

/// Rate at which a lineage riding an edge labeled k detaches:
/// rho/2 times the mass of (S_{k+1}, S_{i+1}).
double detach_rate(double rho, const BreakpointDensity& density, double edge_end_site, double next_site);

enum class TraceStepKind { Start, Coalesce, Ride, Detach };

/// One transition (T_j, xi_j) of the traced lineage.
struct TraceStep {
  TraceStepKind kind = TraceStepKind::Start;
  double latitude = 0.0;
  /// Start: forked branch. Coalesce/Ride: the EDGE now ridden. Detach: the
  /// EDGE left behind. Ids refer to the graph before acceptance.
  int branch = -1;
  /// Material carried after the transition, columns 0..i+1.
  MaterialVector carried;
  /// Detach only: locus inside the material gap.
  double locus = 0.0;
};

/// Completed trace of the new lineage for breakpoint S_{i+1}.
struct TraceState {
  double site = 0.0;           ///< S_{i+1}
  std::size_t column = 0;      ///< i + 1
  TypeSet xi;                  ///< material forked at the recombination
  std::vector<TraceStep> steps;
  /// Free-mode segments [lo, hi) created by the trace (label i+1).
  std::vector<std::pair<double, double>> new_segments;
};

/// Follows the new lineage from its fork until it merges into a
/// branch of the current local tree.
TraceState trace_lineage(const PartialGraph& graph, TreeLocation start, double next_site, double rho,
                         const BreakpointDensity& density, Rng& rng);

/// Grafts the trace onto the graph: adds the trace's segments, extends every
/// material vector by one column, relabels the new local tree.
/// Throws std::logic_error when the trace does not fit the graph.
void accept_breakpoint(PartialGraph& graph, double next_site, const TraceState& trace);

struct SpatialOptions {
  std::size_t max_events = kDefaultEventCap;
  /// When set, every trace transition is written here as a JSON line.
  std::ostream* trace_log = nullptr;
};

/// Runs the spatial algorithm and converts the final graph to an Arg.
Arg simulate_spatial(const SimConfig& config, Rng& rng, const SpatialOptions& options = {});
Arg simulate_spatial(const SimConfig& config, const SpatialOptions& options = {});

/// JSON line for one trace step (used by the debug stream).
std::string trace_step_json(std::size_t breakpoint, double site, std::size_t j, const TraceStep& step);

}  // namespace argsim::spatial
