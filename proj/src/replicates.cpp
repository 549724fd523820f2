#include "argsim/replicates.hpp"

#include <cstdlib>
#include <exception>
#include <stdexcept>

#include <omp.h>

#include "argsim/spatial.hpp"

namespace argsim {

std::string_view engine_name(Engine engine) {
  return engine == Engine::BackInTime ? "backintime" : "spatial";
}

Engine parse_engine(std::string_view name) {
  if (name == "backintime") return Engine::BackInTime;
  if (name == "spatial") return Engine::Spatial;
  throw std::invalid_argument("engine must be backintime or spatial");
}

int thread_cap() {
  if (const char* env = std::getenv("ARGSIM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return omp_get_num_procs();
}

Arg simulate(Engine engine, const SimConfig& config, const RunOptions& options) {
  if (engine == Engine::BackInTime) {
    return simulate_backintime(config, BackInTimeOptions{options.max_events, options.enforce_prefix_rule});
  }
  spatial::SpatialOptions so;
  so.max_events = options.max_events;
  return spatial::simulate_spatial(config, so);
}

namespace {

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void serial_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t k = 0; k < count; ++k) {
    try {
      body(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  rethrow_first(errors);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 0) threads = thread_cap();
  if (threads == 1) {
    serial_for(count, body);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  rethrow_first(errors);
}

std::vector<Arg> run_replicates(Engine engine, const SimConfig& base, std::size_t reps, const RunOptions& options) {
  base.validate();
  std::vector<Arg> out(reps, Arg(State::initial(base.n_samples), {}));
  parallel_for(reps, options.threads, [&](std::size_t r) {
    SimConfig c = base;
    c.replicate_index = r;
    out[r] = simulate(engine, c, options);
  });
  return out;
}

std::vector<SummaryStats> summarize_replicates(Engine engine, const SimConfig& base, std::size_t reps,
                                               std::span<const double> sites, const RunOptions& options) {
  base.validate();
  std::vector<SummaryStats> out(reps);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    SimConfig c = base;
    c.replicate_index = r;
    out[r] = summary(simulate(engine, c, options), sites);
  });
  return out;
}

}  // namespace argsim
