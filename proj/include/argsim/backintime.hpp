#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "argsim/arg.hpp"
#include "argsim/density.hpp"
#include "argsim/rng.hpp"
#include "argsim/state.hpp"

namespace argsim {

/// Run parameters shared by both engines.
struct SimConfig {
  int n_samples = 2;
  double rho = 0.0;
  BreakpointDensity density;
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;

  /// Throws std::invalid_argument when N < 2, N > 64 or rho is negative or
  /// not finite.
  void validate() const;
};

/// Default hard cap on the number of events of one simulated path.
inline constexpr std::size_t kDefaultEventCap = 10'000'000;

/// The path needed more events than the configured cap.
class EventCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackInTimeOptions {
  std::size_t max_events = kDefaultEventCap;
  /// When false, recombination is allowed inside the common-ancestry
  /// prefix of the first lineage. Exists only to check that the statistical
  /// harness detects a broken engine.
  bool enforce_prefix_rule = true;
};

/// Jump rates out of a state.
struct RateBreakdown {
  double coal_rate = 0.0;
  std::vector<double> recomb_rates;
  double total = 0.0;
};

RateBreakdown total_rate(const State& x, double rho, const BreakpointDensity& density,
                         bool prefix_rule = true);

/// Draws the next event of the embedded chain from frozen rates.
/// Throws std::logic_error on the absorbing state.
Event sample_event(const State& x, const RateBreakdown& rates, const BreakpointDensity& density,
                   Rng& rng, bool prefix_rule = true);
Event sample_event(const State& x, double rho, const BreakpointDensity& density, Rng& rng);

/// Exp(rates.total) holding time. Throws std::logic_error when total is 0.
double sample_waiting_time(const RateBreakdown& rates, Rng& rng);

/// Runs the jump process from the initial state to the absorbing state.
Arg simulate_backintime(const SimConfig& config, Rng& rng, const BackInTimeOptions& options = {});

/// Same, seeding from child_seed(config.seed, config.replicate_index).
Arg simulate_backintime(const SimConfig& config, const BackInTimeOptions& options = {});

}  // namespace argsim
