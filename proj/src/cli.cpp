#include "argsim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "argsim/event_log.hpp"
#include "argsim/replicates.hpp"
#include "argsim/spatial.hpp"
#include "argsim/stats.hpp"

namespace argsim::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineBug : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulateArgs {
  std::string engine = "backintime";
  int samples = 2;
  double rho = 0.0;
  std::string density = "uniform";
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  std::string out;
  std::string from_manifest;
  std::string trace_log;
  std::size_t split_bytes = kDefaultSplitBytes;
  std::size_t max_events = kDefaultEventCap;
  int threads = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError(fmt::format("cannot write {}", path.string()));
  f << text;
  if (!f) throw UsageError(fmt::format("failed writing {}", path.string()));
}

void load_manifest(SimulateArgs& a) {
  ordered_json m;
  try {
    m = ordered_json::parse(read_file(a.from_manifest));
    if (m.at("format_version").get<int>() != kFormatVersion) throw UsageError("unsupported manifest format_version");
    a.engine = m.at("engine").get<std::string>();
    a.samples = m.at("N").get<int>();
    a.rho = m.at("rho").get<double>();
    a.density = m.at("density").get<std::string>();
    a.seed = m.at("seed").get<std::uint64_t>();
    a.reps = m.at("reps").get<std::size_t>();
    a.max_events = m.at("max_events").get<std::size_t>();
    a.split_bytes = m.at("split_bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("malformed manifest {}: {}", a.from_manifest, e.what()));
  }
}

int cmd_simulate(SimulateArgs a, std::ostream& out) {
  if (!a.from_manifest.empty()) load_manifest(a);
  if (a.out.empty()) throw UsageError("--out is required");
  if (a.reps == 0) throw UsageError("--reps must be positive");
  const Engine engine = parse_engine(a.engine);
  SimConfig base;
  base.n_samples = a.samples;
  base.rho = a.rho;
  base.density = BreakpointDensity::parse(a.density);
  base.seed = a.seed;
  base.validate();
  if (!a.trace_log.empty() && engine != Engine::Spatial) throw UsageError("--trace-log needs --engine spatial");

  RunOptions opts;
  opts.max_events = a.max_events;
  opts.threads = a.threads;

  const fs::path out_path(a.out);
  std::vector<std::string> buffered;
  std::vector<std::string> files;
  std::size_t buffered_bytes = 0;
  bool split = false;
  std::ofstream trace;
  if (!a.trace_log.empty()) {
    trace.open(a.trace_log, std::ios::binary | std::ios::trunc);
    if (!trace) throw UsageError(fmt::format("cannot write {}", a.trace_log));
  }
  auto replicate_file = [&](std::size_t r) {
    return fs::path(out_path.string() + fmt::format(".r{}.jsonl", r));
  };

  constexpr std::size_t kChunk = 256;
  for (std::size_t first = 0; first < a.reps; first += kChunk) {
    const std::size_t count = std::min(kChunk, a.reps - first);
    std::vector<std::string> logs(count);
    std::vector<std::string> traces(count);
    parallel_for(count, opts.threads, [&](std::size_t k) {
      SimConfig c = base;
      c.replicate_index = first + k;
      std::optional<Arg> arg;
      if (engine == Engine::Spatial && trace.is_open()) {
        std::ostringstream ts;
        ts << fmt::format("{{\"replicate\":{}}}\n", c.replicate_index);
        spatial::SpatialOptions so;
        so.max_events = opts.max_events;
        so.trace_log = &ts;
        arg.emplace(spatial::simulate_spatial(c, so));
        traces[k] = ts.str();
      } else {
        arg.emplace(simulate(engine, c, opts));
      }
      ValidationReport report = validate_arg(*arg);
      if (!report.passed()) {
        throw EngineBug(fmt::format("replicate {} failed validation: {}", c.replicate_index, report.to_string()));
      }
      LogHeader h;
      h.engine = std::string(engine_name(engine));
      h.n_samples = c.n_samples;
      h.rho = c.rho;
      h.density = c.density;
      h.seed = c.seed;
      h.replicate = c.replicate_index;
      h.events = arg->event_count();
      h.checksum = state_checksum(*arg);
      logs[k] = serialize_log(h, *arg);
    });
    for (std::size_t k = 0; k < count; ++k) {
      if (trace.is_open()) trace << traces[k];
      if (!split) {
        buffered_bytes += logs[k].size();
        buffered.push_back(std::move(logs[k]));
        if (buffered_bytes > a.split_bytes) {
          split = true;
          for (std::size_t r = 0; r < buffered.size(); ++r) {
            write_file(replicate_file(r), buffered[r]);
            files.push_back(replicate_file(r).filename().string());
          }
          buffered.clear();
        }
      } else {
        const std::size_t r = first + k;
        write_file(replicate_file(r), logs[k]);
        files.push_back(replicate_file(r).filename().string());
      }
    }
  }
  if (!split) {
    std::string all;
    all.reserve(buffered_bytes);
    for (const auto& s : buffered) all += s;
    write_file(out_path, all);
    files.push_back(out_path.filename().string());
  }

  ordered_json m;
  m["format_version"] = kFormatVersion;
  m["tool"] = kToolVersion;
  m["engine"] = std::string(engine_name(engine));
  m["N"] = base.n_samples;
  m["rho"] = base.rho;
  m["density"] = base.density.to_string();
  m["seed"] = base.seed;
  m["reps"] = a.reps;
  m["max_events"] = a.max_events;
  m["split_bytes"] = a.split_bytes;
  m["layout"] = split ? "per_replicate" : "stream";
  m["files"] = files;
  std::vector<std::string> seeds;
  seeds.reserve(a.reps);
  for (std::size_t r = 0; r < a.reps; ++r) seeds.push_back(format_checksum(child_seed(base.seed, r)));
  m["child_seeds"] = seeds;
  const fs::path manifest(out_path.string() + ".manifest.json");
  write_file(manifest, m.dump(2) + "\n");
  out << fmt::format("wrote {} replicate(s) to {} ({} file(s)); manifest {}\n", a.reps,
                     split ? out_path.string() + ".r*.jsonl" : out_path.string(), files.size(), manifest.string());
  return 0;
}

std::vector<LogRecord> load_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open {}", path));
  return parse_log(in);
}

int cmd_validate(const std::string& path, std::ostream& out) {
  auto records = load_log(path);
  bool all = true;
  for (const auto& rec : records) {
    ValidationReport report = validate_events(rec.header.n_samples, rec.events);
    std::string extra;
    if (report.passed()) {
      Arg arg = Arg::replay(rec.header.n_samples, rec.events);
      std::uint64_t sum = state_checksum(arg);
      if (sum != rec.header.checksum) {
        report.violations.push_back({'b', std::nullopt,
                                     fmt::format("checksum {} does not match header {}", format_checksum(sum),
                                                 format_checksum(rec.header.checksum))});
      }
    }
    all = all && report.passed();
    out << fmt::format("replicate {} ({} events): {}\n", rec.header.replicate, rec.events.size(), report.to_string());
  }
  out << (all ? "PASS\n" : "FAIL\n");
  return all ? 0 : 1;
}

int cmd_tree(const std::string& path, double site, const std::string& format, std::uint64_t replicate,
             std::ostream& out) {
  if (!(site >= 0.0 && site < 1.0)) throw UsageError("--site must lie in [0,1)");
  auto records = load_log(path);
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const LogRecord& r) { return r.header.replicate == replicate; });
  if (it == records.end()) throw UsageError(fmt::format("replicate {} not found in {}", replicate, path));
  Arg arg = [&] {
    try {
      return Arg::replay(it->header.n_samples, it->events);
    } catch (const IllegalEvent& e) {
      throw UsageError(fmt::format("log does not replay: {}", e.what()));
    }
  }();
  LocalTree tree = local_tree(arg, site);
  if (format == "newick") {
    out << to_newick(tree) << "\n";
    return 0;
  }
  out << "time,partition\n";
  for (const auto& level : tree.levels) {
    std::string blocks;
    for (TypeSet b : level.partition) {
      if (!blocks.empty()) blocks += ' ';
      blocks += '{' + b.to_string() + '}';
    }
    out << fmt::format("{},\"{}\"\n", level.time, blocks);
  }
  return 0;
}

struct CompareArgs {
  int samples = 4;
  double rho = 1.0;
  std::string density = "uniform";
  std::uint64_t seed = 0;
  std::size_t reps = 10000;
  std::vector<double> sites{0.0, 0.25, 0.5, 0.75};
  double alpha = 0.001;
  std::string out;
  std::size_t max_events = kDefaultEventCap;
  int threads = 0;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  SimConfig c;
  c.n_samples = a.samples;
  c.rho = a.rho;
  c.density = BreakpointDensity::parse(a.density);
  c.seed = a.seed;
  c.validate();
  if (a.reps < 2) throw UsageError("--reps must be at least 2");
  for (double s : a.sites) {
    if (!(s >= 0.0 && s < 1.0)) throw UsageError("--sites values must lie in [0,1)");
  }
  RunOptions opts;
  opts.max_events = a.max_events;
  opts.threads = a.threads;
  TestReport report = equivalence_report(c, a.reps, a.sites, a.alpha, opts);
  out << report.table();
  if (!a.out.empty()) write_file(a.out, report.csv());
  out << (report.passed() ? "PASS\n" : "FAIL\n");
  return report.passed() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coalescent simulator with recombination: back-in-time and spatial engines", "argsim"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate replicates and write event logs plus a manifest");
  simulate_cmd->add_option("--engine", sim.engine, "backintime or spatial")
      ->check(CLI::IsMember({"backintime", "spatial"}));
  simulate_cmd->add_option("--samples", sim.samples, "Sample size N");
  simulate_cmd->add_option("--rho", sim.rho, "Scaled recombination rate");
  simulate_cmd->add_option("--density", sim.density, "uniform or beta:a,b");
  simulate_cmd->add_option("--seed", sim.seed, "Root seed");
  simulate_cmd->add_option("--reps", sim.reps, "Number of replicates");
  simulate_cmd->add_option("--out", sim.out, "Output log path")->required();
  simulate_cmd->add_option("--from-manifest", sim.from_manifest, "Rerun the configuration stored in a manifest");
  simulate_cmd->add_option("--trace-log", sim.trace_log, "Spatial engine: write trace transitions as JSON lines");
  simulate_cmd->add_option("--split-bytes", sim.split_bytes, "Write one file per replicate above this total size");
  simulate_cmd->add_option("--max-events", sim.max_events, "Event cap per replicate");
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads (default ARGSIM_THREADS or all CPUs)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Replay and validate an event log");
  validate_cmd->add_option("path", validate_path, "Event log")->required();

  std::string tree_path;
  double tree_site = 0.0;
  std::string tree_format = "newick";
  std::uint64_t tree_replicate = 0;
  auto* tree_cmd = app.add_subcommand("tree", "Print the local tree at a site");
  tree_cmd->add_option("path", tree_path, "Event log")->required();
  tree_cmd->add_option("--site", tree_site, "Site in [0,1)");
  tree_cmd->add_option("--format", tree_format, "newick or levels")->check(CLI::IsMember({"newick", "levels"}));
  tree_cmd->add_option("--replicate", tree_replicate, "Replicate index within the log");

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Statistical comparison of the two engines");
  compare_cmd->add_option("--samples", cmp.samples, "Sample size N");
  compare_cmd->add_option("--rho", cmp.rho, "Scaled recombination rate");
  compare_cmd->add_option("--density", cmp.density, "uniform or beta:a,b");
  compare_cmd->add_option("--seed", cmp.seed, "Root seed");
  compare_cmd->add_option("--reps", cmp.reps, "Replicates per engine");
  compare_cmd->add_option("--sites", cmp.sites, "Comma-separated sites")->delimiter(',');
  compare_cmd->add_option("--alpha", cmp.alpha, "Per-test level");
  compare_cmd->add_option("--out", cmp.out, "CSV report path");
  compare_cmd->add_option("--max-events", cmp.max_events, "Event cap per replicate");
  compare_cmd->add_option("--threads", cmp.threads, "Worker threads (default ARGSIM_THREADS or all CPUs)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*validate_cmd) return cmd_validate(validate_path, out);
    if (*tree_cmd) return cmd_tree(tree_path, tree_site, tree_format, tree_replicate, out);
    if (*compare_cmd) return cmd_compare(cmp, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EngineBug& e) {
    err << "engine error: " << e.what() << "\n";
    return 3;
  } catch (const EventCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace argsim::cli
