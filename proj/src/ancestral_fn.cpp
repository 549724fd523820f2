#include "argsim/ancestral_fn.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace argsim {

AncestralFn::AncestralFn(std::vector<double> cuts, std::vector<TypeSet> values)
    : cuts_(std::move(cuts)), values_(std::move(values)) {
  if (values_.size() != cuts_.size() + 1) {
    throw std::invalid_argument("AncestralFn: need exactly one more value than cuts");
  }
  for (std::size_t k = 0; k < cuts_.size(); ++k) {
    if (!(cuts_[k] > 0.0 && cuts_[k] < 1.0)) {
      throw std::invalid_argument("AncestralFn: cut outside (0,1)");
    }
    if (k > 0 && !(cuts_[k - 1] < cuts_[k])) {
      throw std::invalid_argument("AncestralFn: cuts not strictly increasing");
    }
  }
  normalize();
}

void AncestralFn::normalize() {
  std::size_t w = 0;
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (values_[k] == values_[w]) continue;
    ++w;
    values_[w] = values_[k];
    cuts_[w - 1] = cuts_[k - 1];
  }
  values_.resize(w + 1);
  cuts_.resize(w);
}

TypeSet AncestralFn::at(double s) const {
  auto k = std::upper_bound(cuts_.begin(), cuts_.end(), s) - cuts_.begin();
  return values_[static_cast<std::size_t>(k)];
}

TypeSet AncestralFn::left_of(double u) const {
  auto k = std::lower_bound(cuts_.begin(), cuts_.end(), u) - cuts_.begin();
  return values_[static_cast<std::size_t>(k)];
}

bool AncestralFn::is_empty() const { return values_.size() == 1 && values_[0].empty(); }

double AncestralFn::first_nonempty() const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!values_[k].empty()) return k == 0 ? 0.0 : cuts_[k - 1];
  }
  return 1.0;
}

double AncestralFn::support_end() const {
  if (!values_.back().empty()) return 1.0;
  // Canonical form: the trailing run is the only empty run at the end.
  return cuts_.empty() ? 0.0 : cuts_.back();
}

double AncestralFn::first_differing(TypeSet value) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] != value) return k == 0 ? 0.0 : cuts_[k - 1];
  }
  return 1.0;
}

AncestralFn AncestralFn::left_part(double u) const {
  std::vector<double> cuts;
  std::vector<TypeSet> values{values_[0]};
  for (std::size_t k = 0; k < cuts_.size() && cuts_[k] < u; ++k) {
    cuts.push_back(cuts_[k]);
    values.push_back(values_[k + 1]);
  }
  cuts.push_back(u);
  values.push_back(TypeSet{});
  return AncestralFn(std::move(cuts), std::move(values));
}

AncestralFn AncestralFn::right_part(double u) const {
  std::vector<double> cuts{u};
  std::vector<TypeSet> values{TypeSet{}, at(u)};
  for (std::size_t k = 0; k < cuts_.size(); ++k) {
    if (cuts_[k] <= u) continue;
    cuts.push_back(cuts_[k]);
    values.push_back(values_[k + 1]);
  }
  return AncestralFn(std::move(cuts), std::move(values));
}

AncestralFn AncestralFn::frozen_at(double s) const {
  std::vector<double> cuts;
  std::vector<TypeSet> values{values_[0]};
  for (std::size_t k = 0; k < cuts_.size() && cuts_[k] <= s; ++k) {
    cuts.push_back(cuts_[k]);
    values.push_back(values_[k + 1]);
  }
  return AncestralFn(std::move(cuts), std::move(values));
}

AncestralFn join(const AncestralFn& f, const AncestralFn& h) {
  std::vector<double> cuts;
  std::set_union(f.cuts_.begin(), f.cuts_.end(), h.cuts_.begin(), h.cuts_.end(),
                 std::back_inserter(cuts));
  std::vector<TypeSet> values;
  values.reserve(cuts.size() + 1);
  values.push_back(f.values_[0] | h.values_[0]);
  for (double c : cuts) values.push_back(f.at(c) | h.at(c));
  return AncestralFn(std::move(cuts), std::move(values));
}

std::string format_locus(double x) { return fmt::format("{:.17g}", x); }

std::string AncestralFn::render() const {
  std::string out = "[0," + values_[0].to_string();
  for (std::size_t k = 0; k < cuts_.size(); ++k) {
    out += " | ";
    out += format_locus(cuts_[k]);
    out += ',';
    out += values_[k + 1].to_string();
  }
  out += ']';
  return out;
}

double distance_dL(const AncestralFn& f, const AncestralFn& h) {
  std::vector<double> grid{0.0};
  std::set_union(f.cuts().begin(), f.cuts().end(), h.cuts().begin(), h.cuts().end(),
                 std::back_inserter(grid));
  grid.push_back(1.0);
  double measure = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (f.at(grid[k]) != h.at(grid[k])) measure += grid[k + 1] - grid[k];
  }
  return measure;
}

}  // namespace argsim
