#include "argsim/state.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace argsim {

namespace {

struct RankKey {
  double start;
  int label;
};

RankKey rank_key(const AncestralFn& f) {
  double start = f.first_nonempty();
  TypeSet v = f.at(start);
  return {start, v.empty() ? std::numeric_limits<int>::max() : v.min_label()};
}

void check_index(const State& x, std::size_t i) {
  if (i >= x.size()) throw IllegalEvent(fmt::format("lineage index {} out of range", i + 1));
}

}  // namespace

std::vector<AncestralFn> canonical_rank(std::vector<AncestralFn> lineages) {
  std::stable_sort(lineages.begin(), lineages.end(), [](const AncestralFn& a, const AncestralFn& b) {
    RankKey ka = rank_key(a);
    RankKey kb = rank_key(b);
    if (ka.start != kb.start) return ka.start < kb.start;
    return ka.label < kb.label;
  });
  return lineages;
}

State::State(int n_samples, std::vector<AncestralFn> lineages) : n_(n_samples) {
  if (n_samples < 1 || n_samples > kMaxSamples) throw std::invalid_argument("sample size out of range");
  std::erase_if(lineages, [](const AncestralFn& f) { return f.is_empty(); });
  lineages_ = canonical_rank(std::move(lineages));
}

State State::initial(int n_samples) {
  std::vector<AncestralFn> ls;
  for (int j = 1; j <= n_samples; ++j) ls.emplace_back(TypeSet::singleton(j));
  return State(n_samples, std::move(ls));
}

State State::absorbing(int n_samples) {
  return State(n_samples, {AncestralFn(TypeSet::full(n_samples))});
}

std::string State::check() const {
  if (lineages_.empty()) return "state has no lineages";
  const TypeSet all = TypeSet::full(n_);
  for (std::size_t j = 0; j < lineages_.size(); ++j) {
    if (lineages_[j].is_empty()) return fmt::format("lineage {} is identically empty", j + 1);
    for (TypeSet v : lineages_[j].values()) {
      if (!v.subset_of(all)) return fmt::format("lineage {} carries a label outside 1..{}", j + 1, n_);
    }
  }
  if (canonical_rank(lineages_) != lineages_) return "lineages are not in canonical rank order";
  std::vector<double> grid{0.0};
  auto bp = breakpoints();
  grid.insert(grid.end(), bp.begin(), bp.end());
  for (double s : grid) {
    TypeSet seen;
    for (const auto& f : lineages_) {
      TypeSet v = f.at(s);
      if (v.intersects(seen)) return fmt::format("values overlap at locus {}", format_locus(s));
      seen = seen | v;
    }
    if (seen != all) return fmt::format("values do not cover 1..{} at locus {}", n_, format_locus(s));
  }
  return {};
}

ActiveInterval State::active_interval(std::size_t i, bool prefix_rule) const {
  check_index(*this, i);
  const AncestralFn& f = lineages_[i];
  double b = (i == 0 && prefix_rule) ? f.first_differing(TypeSet::full(n_)) : f.first_nonempty();
  return {b, f.support_end()};
}

State State::recombine(std::size_t i, double u, bool prefix_rule) const {
  ActiveInterval iv = active_interval(i, prefix_rule);
  if (!iv.contains(u)) {
    throw IllegalEvent(fmt::format("recombination locus {} outside active interval ({}, {}) of lineage {}",
                                   format_locus(u), format_locus(iv.begin), format_locus(iv.end), i + 1));
  }
  std::vector<AncestralFn> ls;
  ls.reserve(lineages_.size() + 1);
  for (std::size_t j = 0; j < lineages_.size(); ++j) {
    if (j != i) ls.push_back(lineages_[j]);
  }
  ls.push_back(lineages_[i].left_part(u));
  ls.push_back(lineages_[i].right_part(u));
  return State(n_, std::move(ls));
}

State State::coalesce(std::size_t i1, std::size_t i2) const {
  if (lineages_.size() < 2) throw IllegalEvent("coalescence needs at least two lineages");
  if (!(i1 < i2)) throw IllegalEvent(fmt::format("coalescence indices ({}, {}) not increasing", i1 + 1, i2 + 1));
  check_index(*this, i2);
  std::vector<AncestralFn> ls;
  ls.reserve(lineages_.size() - 1);
  for (std::size_t j = 0; j < lineages_.size(); ++j) {
    if (j != i1 && j != i2) ls.push_back(lineages_[j]);
  }
  ls.push_back(join(lineages_[i1], lineages_[i2]));
  return State(n_, std::move(ls));
}

State State::apply(const Event& ev, bool prefix_rule) const {
  if (const auto* c = std::get_if<Coalesce>(&ev)) return coalesce(c->i1, c->i2);
  const auto& r = std::get<Recombine>(ev);
  return recombine(r.i, r.u, prefix_rule);
}

std::vector<TypeSet> State::site_partition(double s) const {
  std::vector<TypeSet> blocks;
  for (const auto& f : lineages_) {
    TypeSet v = f.at(s);
    if (!v.empty()) blocks.push_back(v);
  }
  std::sort(blocks.begin(), blocks.end(), ByMinLabel{});
  return blocks;
}

State State::project(double s) const {
  std::vector<AncestralFn> ls;
  ls.reserve(lineages_.size());
  for (const auto& f : lineages_) ls.push_back(f.frozen_at(s));
  return State(n_, std::move(ls));
}

std::vector<double> State::breakpoints() const {
  std::vector<double> out;
  for (const auto& f : lineages_) out.insert(out.end(), f.cuts().begin(), f.cuts().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double State::min_gap() const {
  std::vector<double> grid{0.0};
  auto bp = breakpoints();
  grid.insert(grid.end(), bp.begin(), bp.end());
  grid.push_back(1.0);
  double gap = 1.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) gap = std::min(gap, grid[k + 1] - grid[k]);
  return gap;
}

std::string State::render() const {
  std::string out;
  for (std::size_t j = 0; j < lineages_.size(); ++j) {
    if (j > 0) out += '\n';
    out += lineages_[j].render();
  }
  return out;
}

bool creates_breakpoint(const AncestralFn& f, double u) {
  return !f.left_of(u).empty() && !f.at(u).empty();
}

std::string render_event(const Event& ev) {
  if (const auto* c = std::get_if<Coalesce>(&ev)) return fmt::format("C({},{})", c->i1 + 1, c->i2 + 1);
  const auto& r = std::get<Recombine>(ev);
  return fmt::format("R({},{})", r.i + 1, format_locus(r.u));
}

}  // namespace argsim
