#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "argsim/arg.hpp"
#include "argsim/backintime.hpp"

namespace argsim {

enum class Engine { BackInTime, Spatial };

std::string_view engine_name(Engine engine);
/// "backintime" or "spatial".
Engine parse_engine(std::string_view name);

/// Worker count: ARGSIM_THREADS when set to a positive integer, else the
/// number of logical CPUs.
int thread_cap();

struct RunOptions {
  std::size_t max_events = kDefaultEventCap;
  /// Back-in-time only. Disabling it is a deliberate mutation for tests.
  bool enforce_prefix_rule = true;
  /// 0 means thread_cap(); 1 runs the serial reference loop.
  int threads = 0;
};

/// Replicate `config.replicate_index` of the run rooted at `config.seed`.
Arg simulate(Engine engine, const SimConfig& config, const RunOptions& options = {});

/// Runs body(0..count-1). Exceptions are captured per index and the one
/// with the lowest index is rethrown after the loop.
void serial_for(std::size_t count, const std::function<void(std::size_t)>& body);
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Replicates 0..reps-1 of `base`; results are indexed by replicate and do
/// not depend on the thread count.
std::vector<Arg> run_replicates(Engine engine, const SimConfig& base, std::size_t reps,
                                const RunOptions& options = {});

/// Like run_replicates but keeps only the summary statistics.
std::vector<SummaryStats> summarize_replicates(Engine engine, const SimConfig& base, std::size_t reps,
                                               std::span<const double> sites, const RunOptions& options = {});

}  // namespace argsim
