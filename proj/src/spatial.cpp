#include "argsim/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace argsim::spatial {

namespace {

MaterialVector fresh_material(std::size_t column, TypeSet xi) {
  MaterialVector z(column + 1);
  z[column] = xi;
  return z;
}

MaterialVector carried_on(const Branch& edge, std::size_t column, TypeSet xi) {
  MaterialVector z = edge.material;
  z.push_back(edge.material[column - 1] | xi);
  return z;
}

}  // namespace

int LatitudeProfile::count_at(double t) const {
  auto it = std::upper_bound(latitudes.begin(), latitudes.end(), t);
  if (it == latitudes.begin()) return 0;
  return counts[static_cast<std::size_t>(std::distance(latitudes.begin(), it)) - 1];
}

double LatitudeProfile::integral(double from, double to) const {
  if (!(to > from)) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < latitudes.size(); ++k) {
    const double a = std::max(from, latitudes[k]);
    const double b = std::min(to, k + 1 < latitudes.size() ? latitudes[k + 1] : kInfinity);
    if (b > a) total += counts[k] * (b - a);
  }
  return total;
}

int PartialGraph::add_node(NodeKind kind, double latitude) {
  Node node;
  node.id = static_cast<int>(nodes_.size());
  node.kind = kind;
  node.latitude = latitude;
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

int PartialGraph::add_branch(double lo, MaterialVector material, std::size_t label, int lower_node) {
  Branch b;
  b.id = static_cast<int>(branches_.size());
  b.lo = lo;
  b.material = std::move(material);
  b.label = label;
  b.lower_node = lower_node;
  branches_.push_back(std::move(b));
  return branches_.back().id;
}

int PartialGraph::split_branch(int b, double t, int node_id) {
  Branch& lower = branches_.at(static_cast<std::size_t>(b));
  if (!(lower.lo < t && t < lower.hi)) {
    throw std::logic_error(fmt::format("cannot split branch {} at latitude {}", b, t));
  }
  const double hi = lower.hi;
  const int upper_node = lower.upper_node;
  int up = add_branch(t, branches_[static_cast<std::size_t>(b)].material, branches_[static_cast<std::size_t>(b)].label,
                      node_id);
  branches_[static_cast<std::size_t>(up)].hi = hi;
  branches_[static_cast<std::size_t>(up)].upper_node = upper_node;
  branches_[static_cast<std::size_t>(b)].hi = t;
  branches_[static_cast<std::size_t>(b)].upper_node = node_id;
  if (upper_node >= 0) {
    auto& below = nodes_[static_cast<std::size_t>(upper_node)].below;
    std::replace(below.begin(), below.end(), b, up);
  }
  return up;
}

void PartialGraph::refresh_top() {
  top_ = -1;
  for (const auto& b : branches_) {
    if (b.upper_node < 0) {
      if (top_ >= 0) throw std::logic_error("graph has more than one top lineage");
      top_ = b.id;
    }
  }
  if (top_ < 0) throw std::logic_error("graph has no top lineage");
}

PartialGraph PartialGraph::kingman(int n_samples, Rng& rng) {
  if (n_samples < 2 || n_samples > kMaxSamples) throw std::invalid_argument("sample size out of range");
  PartialGraph g(n_samples);
  std::vector<int> active;
  for (int j = 1; j <= n_samples; ++j) {
    int leaf = g.add_node(NodeKind::Leaf, 0.0);
    int b = g.add_branch(0.0, {TypeSet::singleton(j)}, 0, leaf);
    g.nodes_[static_cast<std::size_t>(leaf)].above = {b};
    active.push_back(b);
  }
  double t = 0.0;
  while (active.size() >= 2) {
    const std::uint64_t k = active.size();
    t += rng.exponential(0.5 * static_cast<double>(k) * static_cast<double>(k - 1));
    std::uint64_t pair = rng.index(k * (k - 1) / 2);
    std::size_t i1 = 0;
    std::uint64_t row = k - 1;
    while (pair >= row) {
      pair -= row;
      ++i1;
      --row;
    }
    const std::size_t i2 = i1 + 1 + static_cast<std::size_t>(pair);
    const int a = active[i1];
    const int b = active[i2];
    int node = g.add_node(NodeKind::Coalescence, t);
    for (int x : {a, b}) {
      g.branches_[static_cast<std::size_t>(x)].hi = t;
      g.branches_[static_cast<std::size_t>(x)].upper_node = node;
    }
    TypeSet merged = g.branch(a).material[0] | g.branch(b).material[0];
    int up = g.add_branch(t, {merged}, 0, node);
    g.nodes_[static_cast<std::size_t>(node)].below = {a, b};
    g.nodes_[static_cast<std::size_t>(node)].above = {up};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(i2));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(i1));
    active.push_back(up);
  }
  g.refresh_top();
  return g;
}

PartialGraph PartialGraph::from_merges(int n_samples, std::span<const Merge> merges) {
  if (n_samples < 2 || n_samples > kMaxSamples) throw std::invalid_argument("sample size out of range");
  if (merges.size() != static_cast<std::size_t>(n_samples - 1)) {
    throw std::invalid_argument("a Kingman tree over N leaves needs N-1 merges");
  }
  PartialGraph g(n_samples);
  std::vector<int> active;
  for (int j = 1; j <= n_samples; ++j) {
    int leaf = g.add_node(NodeKind::Leaf, 0.0);
    int b = g.add_branch(0.0, {TypeSet::singleton(j)}, 0, leaf);
    g.nodes_[static_cast<std::size_t>(leaf)].above = {b};
    active.push_back(b);
  }
  double last = 0.0;
  for (const auto& m : merges) {
    if (!(m.time > last)) throw std::invalid_argument("merge times must increase");
    last = m.time;
    auto find = [&](TypeSet s) {
      auto it = std::find_if(active.begin(), active.end(), [&](int b) { return g.branch(b).material[0] == s; });
      if (it == active.end()) throw std::invalid_argument("merge names a subtree that is not present");
      return it;
    };
    const int a = *find(m.a);
    const int b = *find(m.b);
    if (a == b) throw std::invalid_argument("merge joins a subtree with itself");
    int node = g.add_node(NodeKind::Coalescence, m.time);
    for (int x : {a, b}) {
      g.branches_[static_cast<std::size_t>(x)].hi = m.time;
      g.branches_[static_cast<std::size_t>(x)].upper_node = node;
    }
    int up = g.add_branch(m.time, {m.a | m.b}, 0, node);
    g.nodes_[static_cast<std::size_t>(node)].below = {a, b};
    g.nodes_[static_cast<std::size_t>(node)].above = {up};
    active.erase(find(m.a));
    active.erase(find(m.b));
    active.push_back(up);
  }
  g.refresh_top();
  return g;
}

std::vector<int> PartialGraph::local_tree_branches() const {
  std::vector<int> out;
  for (const auto& b : branches_) {
    if (b.label == current_index()) out.push_back(b.id);
  }
  return out;
}

double PartialGraph::local_length() const {
  const double beta = grand_mrca();
  double total = 0.0;
  for (const auto& b : branches_) {
    if (b.label == current_index() && b.lo < beta) total += std::min(b.hi, beta) - b.lo;
  }
  return total;
}

std::vector<int> PartialGraph::live_at(double t) const {
  std::vector<int> out;
  for (const auto& b : branches_) {
    if (b.lo <= t && t < b.hi) out.push_back(b.id);
  }
  return out;
}

LatitudeProfile PartialGraph::profile() const {
  std::map<double, int> delta;
  for (const auto& b : branches_) {
    delta[b.lo] += 1;
    if (std::isfinite(b.hi)) delta[b.hi] -= 1;
  }
  LatitudeProfile p;
  int count = 0;
  for (auto [lat, d] : delta) {
    count += d;
    if (!p.counts.empty() && p.counts.back() == count) continue;
    p.latitudes.push_back(lat);
    p.counts.push_back(count);
  }
  return p;
}

std::string PartialGraph::check() const {
  const std::size_t cols = sites_.size();
  int tops = 0;
  for (const auto& b : branches_) {
    if (!(b.lo < b.hi)) return fmt::format("branch {} has lo >= hi", b.id);
    if (b.material.size() != cols) return fmt::format("branch {} has {} material columns", b.id, b.material.size());
    if (b.label >= cols) return fmt::format("branch {} has label {} beyond the current index", b.id, b.label);
    if (b.upper_node < 0) {
      ++tops;
      if (std::isfinite(b.hi)) return fmt::format("top branch {} has a finite upper end", b.id);
    } else {
      const Node& u = node(b.upper_node);
      if (u.latitude != b.hi) return fmt::format("branch {} ends below its upper node", b.id);
      if (std::find(u.below.begin(), u.below.end(), b.id) == u.below.end()) {
        return fmt::format("node {} does not list branch {} below it", u.id, b.id);
      }
    }
    const Node& l = node(b.lower_node);
    if (l.latitude != b.lo) return fmt::format("branch {} starts off its lower node", b.id);
    if (std::find(l.above.begin(), l.above.end(), b.id) == l.above.end()) {
      return fmt::format("node {} does not list branch {} above it", l.id, b.id);
    }
  }
  if (tops != 1) return fmt::format("graph has {} top lineages", tops);
  for (const auto& nd : nodes_) {
    const std::size_t want_below = nd.kind == NodeKind::Leaf ? 0 : nd.kind == NodeKind::Coalescence ? 2 : 1;
    const std::size_t want_above = nd.kind == NodeKind::Recombination ? 2 : 1;
    if (nd.below.size() != want_below || nd.above.size() != want_above) {
      return fmt::format("node {} has the wrong number of edges", nd.id);
    }
    if (nd.kind == NodeKind::Recombination && branch(nd.above[0]).label >= branch(nd.above[1]).label) {
      return fmt::format("recombination node {} does not keep the larger label on its right edge", nd.id);
    }
  }
  const TypeSet full = TypeSet::full(n_);
  for (const auto& b : branches_) {
    auto live = live_at(b.lo);
    for (std::size_t k = 0; k < cols; ++k) {
      TypeSet seen;
      for (int id : live) {
        TypeSet z = branch(id).material[k];
        if (z.intersects(seen)) return fmt::format("column {} overlaps at latitude {}", k, b.lo);
        seen = seen | z;
      }
      if (seen != full) return fmt::format("column {} does not cover all samples at latitude {}", k, b.lo);
    }
  }
  return {};
}

Arg PartialGraph::to_arg() const {
  std::vector<double> cuts(sites_.begin() + 1, sites_.end());
  auto fn_of = [&](int b) { return AncestralFn(cuts, branch(b).material); };

  std::vector<int> order;
  for (const auto& nd : nodes_) {
    if (nd.kind != NodeKind::Leaf) order.push_back(nd.id);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double la = node(a).latitude;
    const double lb = node(b).latitude;
    return la != lb ? la < lb : a < b;
  });

  std::map<int, AncestralFn> live;
  for (const auto& nd : nodes_) {
    if (nd.kind == NodeKind::Leaf) live.emplace(nd.above[0], fn_of(nd.above[0]));
  }
  auto snapshot = [&] {
    std::vector<AncestralFn> ls;
    ls.reserve(live.size());
    for (const auto& [id, f] : live) ls.push_back(f);
    return State(n_, std::move(ls));
  };
  auto rank_of = [](const State& x, const AncestralFn& f) {
    const auto& ls = x.lineages();
    auto it = std::find(ls.begin(), ls.end(), f);
    if (it == ls.end()) throw std::logic_error("graph lineage is missing from the reconstructed state");
    return static_cast<std::size_t>(std::distance(ls.begin(), it));
  };

  State x = snapshot();
  const State initial = x;
  std::vector<ArgStep> steps;
  steps.reserve(order.size());
  for (int id : order) {
    const Node& nd = node(id);
    Event ev;
    if (nd.kind == NodeKind::Coalescence) {
      std::size_t a = rank_of(x, live.at(nd.below[0]));
      std::size_t b = rank_of(x, live.at(nd.below[1]));
      ev = Coalesce{std::min(a, b), std::max(a, b)};
    } else {
      ev = Recombine{rank_of(x, live.at(nd.below[0])), nd.locus};
    }
    State next = x.apply(ev);
    for (int b : nd.below) live.erase(b);
    for (int b : nd.above) live.emplace(b, fn_of(b));
    State rebuilt = snapshot();
    if (rebuilt != next) {
      throw std::logic_error(fmt::format("graph node {} disagrees with the event {}", id, render_event(ev)));
    }
    steps.push_back({nd.latitude, ev, std::move(next)});
    x = steps.back().state;
  }
  return Arg(initial, std::move(steps));
}

double next_breakpoint_survival(double local_length, double current_site, double s, double rho,
                                const BreakpointDensity& density) {
  if (s <= current_site) return 1.0;
  return std::exp(-0.5 * rho * local_length * density.mass(current_site, s));
}

double next_breakpoint_quantile(double local_length, double current_site, double rho,
                                const BreakpointDensity& density, double u) {
  const double rate = 0.5 * rho * local_length;
  if (!(rate > 0.0)) return 1.0;
  const double need = -std::log(u) / rate;
  const double remaining = density.mass(current_site, 1.0);
  if (need >= remaining) return 1.0;
  double s = density.inverse_cdf(density.cdf(current_site) + need);
  if (!(s > current_site)) s = std::nextafter(current_site, 1.0);
  if (!(s < 1.0)) s = std::nextafter(1.0, 0.0);
  return s;
}

double sample_next_breakpoint(double local_length, double current_site, double rho,
                              const BreakpointDensity& density, Rng& rng) {
  if (rho == 0.0) return 1.0;
  return next_breakpoint_quantile(local_length, current_site, rho, density, rng.uniform_open());
}

double sample_next_breakpoint(const PartialGraph& graph, double rho, const BreakpointDensity& density, Rng& rng) {
  return sample_next_breakpoint(graph.local_length(), graph.current_site(), rho, density, rng);
}

TreeLocation locate_on_tree(const PartialGraph& graph, double x) {
  const double beta = graph.grand_mrca();
  TreeLocation last;
  for (int id : graph.local_tree_branches()) {
    const Branch& b = graph.branch(id);
    if (!(b.lo < beta)) continue;
    const double end = std::min(b.hi, beta);
    const double len = end - b.lo;
    last = {id, std::nextafter(end, b.lo)};
    if (x < len) {
      double t = b.lo + x;
      if (!(t < end)) t = std::nextafter(end, b.lo);
      return {id, t};
    }
    x -= len;
  }
  if (last.branch < 0) throw std::logic_error("local tree has zero length");
  return last;
}

TreeLocation sample_recomb_location(const PartialGraph& graph, Rng& rng) {
  return locate_on_tree(graph, rng.uniform_open() * graph.local_length());
}

double sample_free_coalescence(const LatitudeProfile& profile, double from, Rng& rng) {
  double e = rng.exponential(1.0);
  auto it = std::upper_bound(profile.latitudes.begin(), profile.latitudes.end(), from);
  if (it == profile.latitudes.begin()) throw std::invalid_argument("start latitude precedes the profile");
  std::size_t k = static_cast<std::size_t>(std::distance(profile.latitudes.begin(), it)) - 1;
  double t = from;
  for (;; ++k) {
    const int c = profile.counts[k];
    const double end = k + 1 < profile.latitudes.size() ? profile.latitudes[k + 1] : kInfinity;
    if (c > 0) {
      const double cap = c * (end - t);
      if (e < cap) return t + e / c;
      e -= cap;
    } else if (!std::isfinite(end)) {
      throw std::logic_error("profile has no live lineage above its last change point");
    }
    t = end;
  }
}

double free_coalescence_cdf(const LatitudeProfile& profile, double from, double t) {
  if (t <= from) return 0.0;
  return 1.0 - std::exp(-profile.integral(from, t));
}

double detach_rate(double rho, const BreakpointDensity& density, double edge_end_site, double next_site) {
  return 0.5 * rho * density.mass(edge_end_site, next_site);
}

TraceState trace_lineage(const PartialGraph& graph, TreeLocation start, double next_site, double rho,
                         const BreakpointDensity& density, Rng& rng) {
  const std::size_t i = graph.current_index();
  const std::size_t column = i + 1;
  const auto& sites = graph.sites();
  if (!(next_site > sites.back() && next_site < 1.0)) throw std::invalid_argument("next site out of range");
  const Branch& forked = graph.branch(start.branch);
  if (forked.label != i) throw std::invalid_argument("trace must start on the current local tree");

  TraceState tr;
  tr.site = next_site;
  tr.column = column;
  tr.xi = forked.material[i];
  const MaterialVector free_material = fresh_material(column, tr.xi);
  tr.steps.push_back({TraceStepKind::Start, start.latitude, start.branch, free_material, 0.0});

  const LatitudeProfile profile = graph.profile();
  double t = start.latitude;
  double segment_lo = t;
  for (;;) {
    t = sample_free_coalescence(profile, t, rng);
    auto live = graph.live_at(t);
    int edge = live[static_cast<std::size_t>(rng.index(live.size()))];
    tr.new_segments.emplace_back(segment_lo, t);
    tr.steps.push_back({TraceStepKind::Coalesce, t, edge, carried_on(graph.branch(edge), column, tr.xi), 0.0});

    bool detached = false;
    while (!detached) {
      const Branch& e = graph.branch(edge);
      if (e.label == i) return tr;
      const double lo = sites[e.label + 1];
      const double rate = detach_rate(rho, density, lo, next_site);
      const double w = rate > 0.0 ? rng.exponential(rate) : kInfinity;
      if (t + w < e.hi) {
        t += w;
        const double u = density.truncated_inverse(lo, next_site, rng.uniform_open());
        tr.steps.push_back({TraceStepKind::Detach, t, edge, free_material, u});
        segment_lo = t;
        detached = true;
        continue;
      }
      t = e.hi;
      const Node& up = graph.node(e.upper_node);
      int next = up.above[0];
      if (up.kind == NodeKind::Recombination) {
        next = graph.branch(up.above[0]).label > graph.branch(up.above[1]).label ? up.above[0] : up.above[1];
      }
      edge = next;
      tr.steps.push_back({TraceStepKind::Ride, t, edge, carried_on(graph.branch(edge), column, tr.xi), 0.0});
    }
  }
}

void accept_breakpoint(PartialGraph& g, double next_site, const TraceState& trace) {
  const std::size_t i = g.current_index();
  const std::size_t c = i + 1;
  if (trace.column != c || trace.site != next_site || !(next_site > g.current_site() && next_site < 1.0)) {
    throw std::logic_error("trace does not belong to this graph and breakpoint");
  }
  if (trace.steps.size() < 2 || trace.steps.front().kind != TraceStepKind::Start) {
    throw std::logic_error("trace is incomplete");
  }
  const double t0 = trace.steps.front().latitude;
  const TypeSet xi = trace.xi;
  const std::size_t old_count = g.branches_.size();
  for (const auto& s : trace.steps) {
    if (s.branch < 0 || static_cast<std::size_t>(s.branch) >= old_count) {
      throw std::logic_error("trace names a branch outside the graph");
    }
  }
  if (g.branch(trace.steps.front().branch).material[i] != xi) throw std::logic_error("trace material differs from fork");

  g.sites_.push_back(next_site);
  for (auto& b : g.branches_) b.material.push_back(b.material[i]);

  std::vector<int> origin(old_count);
  std::iota(origin.begin(), origin.end(), 0);
  std::vector<std::vector<int>> pieces(old_count);
  for (std::size_t b = 0; b < old_count; ++b) pieces[b] = {static_cast<int>(b)};
  std::vector<char> on_path(old_count, 0);
  std::vector<char> is_new(old_count, 0);

  auto grow = [&](int id, int orig, bool fresh) {
    origin.push_back(orig);
    on_path.push_back(0);
    is_new.push_back(fresh ? 1 : 0);
    if (orig >= 0) pieces[static_cast<std::size_t>(orig)].push_back(id);
    (void)id;
  };
  auto resolve = [&](int orig, double t) {
    for (int p : pieces[static_cast<std::size_t>(orig)]) {
      const Branch& b = g.branch(p);
      if (b.lo <= t && t < b.hi) return p;
    }
    throw std::logic_error(fmt::format("trace latitude {} lies outside branch {}", t, orig));
  };
  auto split = [&](int p, double t, NodeKind kind) {
    int node = g.add_node(kind, t);
    int up = g.split_branch(p, t, node);
    grow(up, origin[static_cast<std::size_t>(p)], false);
    g.nodes_[static_cast<std::size_t>(node)].below = {p};
    return std::pair{node, up};
  };
  auto open_segment = [&](int node, double t, double locus) {
    int seg = g.add_branch(t, fresh_material(c, xi), c, node);
    grow(seg, -1, true);
    Node& nd = g.nodes_[static_cast<std::size_t>(node)];
    nd.split_column = static_cast<std::size_t>(
        std::distance(g.sites_.begin(), std::lower_bound(g.sites_.begin(), g.sites_.end(), locus)));
    nd.locus = locus;
    return seg;
  };

  int open = -1;
  int path = -1;
  for (const auto& s : trace.steps) {
    switch (s.kind) {
      case TraceStepKind::Start: {
        auto [node, up] = split(resolve(s.branch, s.latitude), s.latitude, NodeKind::Recombination);
        int seg = open_segment(node, s.latitude, next_site);
        g.nodes_[static_cast<std::size_t>(node)].above = {up, seg};
        open = seg;
        break;
      }
      case TraceStepKind::Coalesce: {
        if (open < 0) throw std::logic_error("trace coalesces while riding an edge");
        auto [node, up] = split(resolve(s.branch, s.latitude), s.latitude, NodeKind::Coalescence);
        Node& nd = g.nodes_[static_cast<std::size_t>(node)];
        nd.below.push_back(open);
        nd.above = {up};
        g.branches_[static_cast<std::size_t>(open)].hi = s.latitude;
        g.branches_[static_cast<std::size_t>(open)].upper_node = node;
        open = -1;
        path = up;
        on_path[static_cast<std::size_t>(up)] = 1;
        break;
      }
      case TraceStepKind::Ride: {
        if (open >= 0) throw std::logic_error("trace rides an edge while free");
        path = resolve(s.branch, s.latitude);
        on_path[static_cast<std::size_t>(path)] = 1;
        break;
      }
      case TraceStepKind::Detach: {
        if (open >= 0) throw std::logic_error("trace detaches while free");
        int p = resolve(s.branch, s.latitude);
        if (p != path) throw std::logic_error("trace detaches from an edge it is not riding");
        auto [node, up] = split(p, s.latitude, NodeKind::Recombination);
        if (!(s.locus > g.sites_[g.branch(p).label + 1] && s.locus < next_site)) {
          throw std::logic_error("detach locus lies outside the material gap");
        }
        int seg = open_segment(node, s.latitude, s.locus);
        g.nodes_[static_cast<std::size_t>(node)].above = {up, seg};
        open = seg;
        path = -1;
        break;
      }
    }
  }
  if (open >= 0 || path < 0) throw std::logic_error("trace was not absorbed into the local tree");
  if (g.branch(path).label != i) throw std::logic_error("trace ends on an edge outside the local tree");

  for (int b = path;;) {
    const int up = g.branch(b).upper_node;
    if (up < 0) break;
    const Node& nd = g.node(up);
    b = nd.above[0];
    if (nd.kind == NodeKind::Recombination && g.branch(nd.above[1]).label > g.branch(b).label) b = nd.above[1];
    on_path[static_cast<std::size_t>(b)] = 1;
  }

  for (auto& b : g.branches_) {
    const auto id = static_cast<std::size_t>(b.id);
    if (is_new[id]) continue;
    if (on_path[id]) {
      b.material[c] = b.material[i] | xi;
    } else if (b.lo >= t0) {
      b.material[c] = b.material[i] - xi;
    }
  }

  std::vector<char> visited(g.branches_.size(), 0);
  for (const auto& nd : g.nodes_) {
    if (nd.kind != NodeKind::Leaf) continue;
    for (int b = nd.above[0];;) {
      if (visited[static_cast<std::size_t>(b)]) break;
      visited[static_cast<std::size_t>(b)] = 1;
      const int up = g.branch(b).upper_node;
      if (up < 0) break;
      const Node& u = g.node(up);
      b = u.above[0];
      if (u.kind == NodeKind::Recombination) {
        const Branch& l = g.branch(u.above[0]);
        const Branch& r = g.branch(u.above[1]);
        if (l.label == r.label) throw std::logic_error("recombination node has equal upper labels");
        b = l.label > r.label ? l.id : r.id;
      }
    }
  }
  for (auto& b : g.branches_) {
    const bool carries = !b.material[c].empty();
    if (carries != static_cast<bool>(visited[static_cast<std::size_t>(b.id)])) {
      throw std::logic_error(fmt::format("local tree walk disagrees with material at branch {}", b.id));
    }
    if (carries) b.label = c;
  }
  g.refresh_top();
}

std::string trace_step_json(std::size_t breakpoint, double site, std::size_t j, const TraceStep& step) {
  static constexpr const char* kinds[] = {"start", "coal", "ride", "detach"};
  std::string xi = "[";
  for (std::size_t k = 0; k < step.carried.size(); ++k) {
    if (k) xi += ',';
    xi += '[' + step.carried[k].to_string() + ']';
  }
  xi += ']';
  std::string out = fmt::format(R"({{"breakpoint":{},"site":{:.17g},"j":{},"kind":"{}","T":{:.17g},"branch":{},"xi":{})",
                                breakpoint, site, j, kinds[static_cast<int>(step.kind)], step.latitude, step.branch, xi);
  if (step.kind == TraceStepKind::Detach) out += fmt::format(R"(,"locus":{:.17g})", step.locus);
  out += "}";
  return out;
}

Arg simulate_spatial(const SimConfig& config, Rng& rng, const SpatialOptions& options) {
  config.validate();
  PartialGraph g = PartialGraph::kingman(config.n_samples, rng);
  for (;;) {
    const double next = sample_next_breakpoint(g, config.rho, config.density, rng);
    if (next >= 1.0) break;
    TreeLocation at = sample_recomb_location(g, rng);
    TraceState tr = trace_lineage(g, at, next, config.rho, config.density, rng);
    if (options.trace_log != nullptr) {
      for (std::size_t j = 0; j < tr.steps.size(); ++j) {
        *options.trace_log << trace_step_json(tr.column, next, j, tr.steps[j]) << '\n';
      }
    }
    accept_breakpoint(g, next, tr);
    if (g.event_count() > options.max_events) {
      throw EventCapExceeded(fmt::format("spatial graph exceeded {} events", options.max_events));
    }
  }
  return g.to_arg();
}

Arg simulate_spatial(const SimConfig& config, const SpatialOptions& options) {
  Rng rng(child_seed(config.seed, config.replicate_index));
  return simulate_spatial(config, rng, options);
}

}  // namespace argsim::spatial
