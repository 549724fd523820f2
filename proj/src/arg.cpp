#include "argsim/arg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>

namespace argsim {

Arg Arg::replay(int n_samples, std::span<const TimedEvent> events) {
  State x = State::initial(n_samples);
  std::vector<ArgStep> steps;
  steps.reserve(events.size());
  for (const auto& te : events) {
    x = x.apply(te.event);
    steps.push_back({te.time, te.event, x});
  }
  return Arg(State::initial(n_samples), std::move(steps));
}

const State& Arg::state_at(double t) const {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const ArgStep& s) { return v < s.time; });
  if (it == steps_.begin()) return initial_;
  return std::prev(it)->state;
}

std::vector<TimedEvent> Arg::events() const {
  std::vector<TimedEvent> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) out.push_back({s.time, s.event});
  return out;
}

bool ValidationReport::cites(char clause) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.clause == clause; });
}

std::string ValidationReport::to_string() const {
  if (passed()) return "PASS";
  std::string out = fmt::format("FAIL ({} violation{})", violations.size(), violations.size() == 1 ? "" : "s");
  for (const auto& v : violations) {
    out += fmt::format("\n  clause ({})", v.clause);
    if (v.event_index) out += fmt::format(" event {}", *v.event_index);
    out += ": " + v.message;
  }
  return out;
}

namespace {

// Shared validation loop. `stored(k)` yields the recorded state after event
// k, or nullptr for events-only logs (then the replayed state is used).
template <class StoredFn>
ValidationReport validate_core(const State& initial, int n, std::size_t count,
                               const std::function<const TimedEvent&(std::size_t)>& event_at, StoredFn stored,
                               bool prefix_rule) {
  ValidationReport report;
  auto fail = [&](char clause, std::optional<std::size_t> idx, std::string msg) {
    report.violations.push_back({clause, idx, std::move(msg)});
  };
  if (initial != State::initial(n)) fail('a', std::nullopt, "initial state is not the singleton state");

  std::set<double> loci;
  State prev = initial;
  double last_time = 0.0;
  bool replay_ok = true;
  for (std::size_t k = 0; k < count; ++k) {
    const TimedEvent& te = event_at(k);
    if (!std::isfinite(te.time) || !(te.time > last_time)) {
      fail('e', k, fmt::format("time {} does not exceed previous time {}", format_locus(te.time),
                               format_locus(last_time)));
    }
    last_time = te.time;

    std::optional<State> next;
    try {
      next = prev.apply(te.event, prefix_rule);
    } catch (const IllegalEvent& e) {
      fail('b', k, fmt::format("{} is not a legal transition: {}", render_event(te.event), e.what()));
    }
    if (next) {
      if (const auto* r = std::get_if<Recombine>(&te.event)) {
        if (creates_breakpoint(prev.lineage(r->i), r->u) && !loci.insert(r->u).second) {
          fail('c', k, fmt::format("recombination locus {} used more than once", format_locus(r->u)));
        }
      }
    }
    const State* recorded = stored(k);
    if (recorded != nullptr) {
      if (std::string why = recorded->check(); !why.empty()) {
        fail('b', k, "recorded state is not well-formed: " + why);
      }
      if (next && *next != *recorded) fail('b', k, "recorded state differs from the event applied to its predecessor");
      prev = *recorded;
    } else if (next) {
      prev = std::move(*next);
    } else {
      replay_ok = false;
      break;
    }
  }
  if (replay_ok && prev != State::absorbing(n)) fail('d', std::nullopt, "path does not end in the absorbing state");
  return report;
}

}  // namespace

ValidationReport validate_arg(const Arg& arg, bool prefix_rule) {
  const auto& steps = arg.steps();
  std::vector<TimedEvent> evs = arg.events();
  return validate_core(
      arg.initial(), arg.n_samples(), steps.size(), [&](std::size_t k) -> const TimedEvent& { return evs[k]; },
      [&](std::size_t k) -> const State* { return &steps[k].state; }, prefix_rule);
}

ValidationReport validate_events(int n_samples, std::span<const TimedEvent> events) {
  return validate_core(
      State::initial(n_samples), n_samples, events.size(),
      [&](std::size_t k) -> const TimedEvent& { return events[k]; },
      [](std::size_t) -> const State* { return nullptr; }, true);
}

Breakpoints breakpoints(const Arg& arg) {
  std::map<double, double> first_seen;
  const State* prev = &arg.initial();
  for (const auto& step : arg.steps()) {
    if (const auto* r = std::get_if<Recombine>(&step.event)) {
      if (r->i < prev->size() && creates_breakpoint(prev->lineage(r->i), r->u)) {
        first_seen.emplace(r->u, step.time);
      }
    }
    prev = &step.state;
  }
  Breakpoints out;
  for (auto [locus, time] : first_seen) {
    out.loci.push_back(locus);
    out.appearance_times.push_back(time);
  }
  return out;
}

std::vector<double> site_grid(std::span<const double> loci) {
  std::vector<double> sites{0.0};
  sites.insert(sites.end(), loci.begin(), loci.end());
  return sites;
}

std::vector<MaterialVector> material_vectors(const State& x, std::span<const double> sites) {
  std::vector<MaterialVector> out;
  out.reserve(x.size());
  for (const auto& f : x.lineages()) {
    MaterialVector z;
    z.reserve(sites.size());
    for (double s : sites) z.push_back(f.at(s));
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<MaterialVector> material_vectors(const Arg& arg, double t) {
  auto bp = breakpoints(arg);
  return material_vectors(arg.state_at(t), site_grid(bp.loci));
}

State state_from_vectors(int n_samples, std::span<const MaterialVector> vectors, std::span<const double> sites) {
  std::vector<double> cuts(sites.begin() + 1, sites.end());
  std::vector<AncestralFn> ls;
  ls.reserve(vectors.size());
  for (const auto& z : vectors) {
    if (z.size() != sites.size()) throw std::invalid_argument("material vector length does not match site grid");
    ls.emplace_back(cuts, z);
  }
  return State(n_samples, std::move(ls));
}

LocalTree local_tree(const Arg& arg, double site) {
  if (!(site >= 0.0 && site < 1.0)) throw std::invalid_argument("site must lie in [0,1)");
  LocalTree tree;
  tree.site = site;
  tree.levels.push_back({0.0, arg.initial().site_partition(site)});

  auto projected_count = [site](const State& x) {
    return std::count_if(x.lineages().begin(), x.lineages().end(),
                         [site](const AncestralFn& f) { return f.first_nonempty() <= site; });
  };
  bool have_height = tree.levels.back().partition.size() == 1;
  bool have_beta = projected_count(arg.initial()) == 1;
  for (const auto& step : arg.steps()) {
    if (have_height && have_beta) break;
    if (!have_height) {
      auto part = step.state.site_partition(site);
      if (part != tree.levels.back().partition) {
        tree.levels.push_back({step.time, std::move(part)});
        if (tree.levels.back().partition.size() == 1) {
          have_height = true;
          tree.height = step.time;
        }
      }
    }
    if (!have_beta && projected_count(step.state) == 1) {
      have_beta = true;
      tree.beta = step.time;
    }
  }
  for (std::size_t k = 0; k + 1 < tree.levels.size(); ++k) {
    tree.tree_length += static_cast<double>(tree.levels[k].partition.size()) *
                        (tree.levels[k + 1].time - tree.levels[k].time);
  }
  tree.total_length = tree.tree_length + (tree.beta - tree.height);
  return tree;
}

std::string to_newick(const LocalTree& tree) {
  struct Node {
    std::string text;
    double time;
  };
  std::map<std::uint64_t, Node> nodes;
  for (TypeSet b : tree.levels.front().partition) nodes[b.bits()] = {b.to_string(), 0.0};
  for (std::size_t k = 1; k < tree.levels.size(); ++k) {
    const auto& prev = tree.levels[k - 1].partition;
    const auto& next = tree.levels[k].partition;
    std::vector<TypeSet> merged;
    for (TypeSet b : prev) {
      if (std::find(next.begin(), next.end(), b) == next.end()) merged.push_back(b);
    }
    if (merged.size() != 2) throw std::logic_error("local tree level is not a single binary merge");
    std::sort(merged.begin(), merged.end(), ByMinLabel{});
    const double t = tree.levels[k].time;
    const Node& a = nodes.at(merged[0].bits());
    const Node& b = nodes.at(merged[1].bits());
    Node parent{fmt::format("({}:{},{}:{})", a.text, t - a.time, b.text, t - b.time), t};
    nodes.erase(merged[0].bits());
    nodes.erase(merged[1].bits());
    nodes[(merged[0] | merged[1]).bits()] = std::move(parent);
  }
  if (nodes.size() != 1) throw std::logic_error("local tree does not reach a single root");
  return nodes.begin()->second.text + ";";
}

StatePath state_path(const Arg& arg) {
  StatePath p{arg.initial(), {}};
  p.jumps.reserve(arg.steps().size());
  for (const auto& s : arg.steps()) p.jumps.emplace_back(s.time, s.state);
  return p;
}

StatePath project_path(const StatePath& path, double s) {
  StatePath out{path.initial.project(s), {}};
  const State* last = &out.initial;
  for (const auto& [t, x] : path.jumps) {
    State y = x.project(s);
    if (y == *last) continue;
    out.jumps.emplace_back(t, std::move(y));
    last = &out.jumps.back().second;
  }
  return out;
}

StatePath project_arg(const Arg& arg, double s) { return project_path(state_path(arg), s); }

SummaryStats summary(const Arg& arg, std::span<const double> sites) {
  SummaryStats st;
  st.breakpoint_count = breakpoints(arg).loci.size();
  st.event_count = arg.event_count();
  st.grand_mrca_time = arg.final_time();
  st.max_lineages = arg.initial().size();
  for (const auto& s : arg.steps()) st.max_lineages = std::max(st.max_lineages, s.state.size());
  for (double s : sites) {
    LocalTree t = local_tree(arg, s);
    st.sites.push_back(s);
    st.tmrca_at.push_back(t.height);
    st.length_at.push_back(t.total_length);
    st.tree_length_at.push_back(t.tree_length);
  }
  return st;
}

std::uint64_t state_checksum(const Arg& arg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view text) {
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : arg.steps()) {
    feed(s.state.render());
    feed("\n");
  }
  return h;
}

}  // namespace argsim
