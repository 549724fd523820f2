#pragma once

#include <initializer_list>
#include <vector>

#include "argsim/ancestral_fn.hpp"
#include "argsim/state.hpp"

namespace fixtures {

using argsim::AncestralFn;
using argsim::TypeSet;

inline TypeSet S(std::initializer_list<int> labels) { return TypeSet::of(labels); }

inline AncestralFn fn(std::vector<double> cuts, std::vector<TypeSet> values) {
  return AncestralFn(std::move(cuts), std::move(values));
}

inline AncestralFn constant(std::initializer_list<int> labels) { return AncestralFn(S(labels)); }

// N=2, first lineage carries {1,2} on [0,0.3) and {1} after.
inline argsim::State coalesced_prefix_state() {
  return argsim::State(2, {fn({0.3}, {S({1, 2}), S({1})}), fn({0.3}, {S({}), S({2})})});
}

// N=4 with active intervals (0,1), (0,1), (0.2,0.6), (0.3,1).
inline argsim::State four_lineage_state() {
  return argsim::State(4, {
                              constant({1}),
                              fn({0.2, 0.3, 0.6}, {S({2, 3, 4}), S({3, 4}), S({4}), S({2, 4})}),
                              fn({0.2, 0.6}, {S({}), S({2}), S({})}),
                              fn({0.3}, {S({}), S({3})}),
                          });
}

}  // namespace fixtures
