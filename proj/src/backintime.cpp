#include "argsim/backintime.hpp"

#include <cmath>

#include <fmt/format.h>

namespace argsim {

void SimConfig::validate() const {
  if (n_samples < 2 || n_samples > kMaxSamples) {
    throw std::invalid_argument(fmt::format("sample size must be in 2..{}", kMaxSamples));
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be finite and nonnegative");
}

RateBreakdown total_rate(const State& x, double rho, const BreakpointDensity& density, bool prefix_rule) {
  RateBreakdown r;
  const std::size_t k = x.size();
  r.recomb_rates.assign(k, 0.0);
  if (k < 2) return r;
  r.coal_rate = 0.5 * static_cast<double>(k) * static_cast<double>(k - 1);
  r.total = r.coal_rate;
  for (std::size_t i = 0; i < k; ++i) {
    ActiveInterval iv = x.active_interval(i, prefix_rule);
    if (iv.empty() || rho == 0.0) continue;
    r.recomb_rates[i] = 0.5 * rho * density.mass(iv.begin, iv.end);
    r.total += r.recomb_rates[i];
  }
  return r;
}

Event sample_event(const State& x, const RateBreakdown& rates, const BreakpointDensity& density, Rng& rng,
                   bool prefix_rule) {
  if (x.size() < 2 || !(rates.total > 0.0)) throw std::logic_error("sample_event: absorbing state");
  double r = rng.uniform() * rates.total;
  if (r < rates.coal_rate) {
    const std::uint64_t k = x.size();
    std::uint64_t pair = rng.index(k * (k - 1) / 2);
    // Pairs enumerated as (0,1), (0,2), ..., (0,k-1), (1,2), ...
    std::size_t i1 = 0;
    std::uint64_t row = k - 1;
    while (pair >= row) {
      pair -= row;
      ++i1;
      --row;
    }
    return Coalesce{i1, i1 + 1 + static_cast<std::size_t>(pair)};
  }
  r -= rates.coal_rate;
  std::size_t chosen = rates.recomb_rates.size();
  for (std::size_t i = 0; i < rates.recomb_rates.size(); ++i) {
    if (rates.recomb_rates[i] <= 0.0) continue;
    chosen = i;
    if (r < rates.recomb_rates[i]) break;
    r -= rates.recomb_rates[i];
  }
  if (chosen == rates.recomb_rates.size()) throw std::logic_error("sample_event: no positive recombination rate");
  ActiveInterval iv = x.active_interval(chosen, prefix_rule);
  return Recombine{chosen, density.truncated_inverse(iv.begin, iv.end, rng.uniform_open())};
}

Event sample_event(const State& x, double rho, const BreakpointDensity& density, Rng& rng) {
  return sample_event(x, total_rate(x, rho, density), density, rng);
}

double sample_waiting_time(const RateBreakdown& rates, Rng& rng) {
  if (!(rates.total > 0.0)) throw std::logic_error("sample_waiting_time: zero total rate");
  return rng.exponential(rates.total);
}

Arg simulate_backintime(const SimConfig& config, Rng& rng, const BackInTimeOptions& options) {
  config.validate();
  const bool rule = options.enforce_prefix_rule;
  State x = State::initial(config.n_samples);
  std::vector<ArgStep> steps;
  double t = 0.0;
  while (!x.is_absorbing()) {
    if (steps.size() >= options.max_events) {
      throw EventCapExceeded(fmt::format("back-in-time path exceeded {} events", options.max_events));
    }
    RateBreakdown rates = total_rate(x, config.rho, config.density, rule);
    t += sample_waiting_time(rates, rng);
    Event ev = sample_event(x, rates, config.density, rng, rule);
    x = x.apply(ev, rule);
    steps.push_back({t, ev, x});
  }
  return Arg(State::initial(config.n_samples), std::move(steps));
}

Arg simulate_backintime(const SimConfig& config, const BackInTimeOptions& options) {
  Rng rng(child_seed(config.seed, config.replicate_index));
  return simulate_backintime(config, rng, options);
}

}  // namespace argsim
