// Acceptance suite: one PASS/FAIL line per criterion, pinned seeds.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>
#include <unistd.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/core.h>

#include "argsim/backintime.hpp"
#include "argsim/replicates.hpp"
#include "argsim/spatial.hpp"
#include "argsim/stats.hpp"
#include "fixtures.hpp"

using namespace argsim;
using namespace argsim::spatial;
using fixtures::S;
namespace fs = std::filesystem;

namespace {

constexpr double kAlpha = 0.001;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

RunOptions parallel_options() {
  RunOptions o;
  o.threads = thread_cap();
  return o;
}

PartialGraph four_leaf_tree() {
  std::vector<PartialGraph::Merge> m{{0.25, S({1}), S({2})}, {0.75, S({3}), S({4})}, {1.5, S({1, 2}), S({3, 4})}};
  return PartialGraph::from_merges(4, m);
}

Outcome kingman_marginals() {
  SimConfig cfg;
  cfg.n_samples = 6;
  cfg.rho = 0.0;
  cfg.seed = 0xC1;
  const std::size_t reps = 100000;
  std::vector<double> sites{0.0};
  auto expect = kingman_expectations(6);
  bool pass = true;
  std::string detail;
  for (Engine e : {Engine::BackInTime, Engine::Spatial}) {
    auto sums = summarize_replicates(e, cfg, reps, sites, parallel_options());
    std::vector<double> h;
    std::vector<double> l;
    for (const auto& s : sums) {
      h.push_back(s.tmrca_at[0]);
      l.push_back(s.tree_length_at[0]);
    }
    const double eh = std::abs(mean(h) / expect.tmrca - 1.0);
    const double el = std::abs(mean(l) / expect.total_length - 1.0);
    pass = pass && eh < 0.02 && el < 0.02;
    detail += fmt::format("{} mean TMRCA {:.4f} (rel err {:.4f}), mean length {:.4f} (rel err {:.4f}); ",
                          engine_name(e), mean(h), eh, mean(l), el);
  }
  detail += fmt::format("targets {:.4f}, {:.4f}, tolerance 2%", expect.tmrca, expect.total_length);
  return {pass, detail};
}

Outcome engine_equivalence() {
  SimConfig cfg;
  cfg.n_samples = 4;
  cfg.rho = 1.0;
  cfg.seed = 0xC2;
  std::vector<double> sites{0.0, 0.5};
  TestReport rep = equivalence_report(cfg, 100000, sites, kAlpha, parallel_options());
  const double z = rep.row("breakpoints_mean_z").stat;
  std::cout << rep.table();
  const bool pass = rep.passed() && std::abs(z) <= 3.0;
  double min_p = 1.0;
  for (const auto& r : rep.rows) min_p = std::min(min_p, r.p);
  return {pass, fmt::format("{} tests at alpha {}, smallest p {:.4g}, mean |Bp| z {:.3f} (limit 3)", rep.rows.size(),
                            kAlpha, min_p, z)};
}

Outcome breakpoint_law() {
  PartialGraph g = four_leaf_tree();
  const double L = g.local_length();
  const double rho = 4.0 / L;
  const double rate = rho * L / 2.0;
  Rng rng(0xC3);
  const std::size_t draws = 1000000;
  std::vector<double> continuous;
  std::size_t atoms = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    double s = sample_next_breakpoint(g, rho, BreakpointDensity::uniform(), rng);
    if (s == 1.0) ++atoms;
    else continuous.push_back(s);
  }
  const double mass = std::exp(-rate);
  auto cdf = [&](double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return (1.0 - std::exp(-rate * s)) / (1.0 - mass);
  };
  TestResult ks = ks_one_sample(continuous, cdf);
  const double freq = static_cast<double>(atoms) / static_cast<double>(draws);
  const double sigma = std::sqrt(mass * (1.0 - mass) / static_cast<double>(draws));
  const double dev = std::abs(freq - mass) / sigma;
  return {ks.p_value > kAlpha && dev <= 3.0,
          fmt::format("L {} rho {}; KS D {:.5f} p {:.4g}; atom freq {:.6f} vs {:.6f} ({:.2f} sigma)", L, rho,
                      ks.statistic, ks.p_value, freq, mass, dev)};
}

Outcome uniform_location() {
  PartialGraph g = four_leaf_tree();
  // Branch lengths by leaf set and lineage counts by latitude, written out by hand.
  const std::map<std::uint64_t, double> lengths{{S({1}).bits(), 0.25}, {S({2}).bits(), 0.25},
                                                {S({3}).bits(), 0.75}, {S({4}).bits(), 0.75},
                                                {S({1, 2}).bits(), 1.25}, {S({3, 4}).bits(), 0.75}};
  const double L = 4.0;
  auto latitude_cdf = [](double t) {
    if (t <= 0.0) return 0.0;
    if (t < 0.25) return 4.0 * t / 4.0;
    if (t < 0.75) return (1.0 + 3.0 * (t - 0.25)) / 4.0;
    if (t < 1.5) return (2.5 + 2.0 * (t - 0.75)) / 4.0;
    return 1.0;
  };
  Rng rng(0xC4);
  const std::size_t draws = 100000;
  std::map<std::uint64_t, double> hits;
  std::vector<double> lat;
  for (std::size_t k = 0; k < draws; ++k) {
    TreeLocation loc = sample_recomb_location(g, rng);
    hits[g.branch(loc.branch).material[0].bits()] += 1.0;
    lat.push_back(loc.latitude);
  }
  std::vector<double> observed;
  std::vector<double> weights;
  double extra = 0.0;
  for (const auto& [key, n] : hits) {
    if (!lengths.count(key)) extra += n;
  }
  for (const auto& [key, len] : lengths) {
    observed.push_back(hits.count(key) ? hits[key] : 0.0);
    weights.push_back(len / L);
  }
  TestResult chi = chi_square(observed, weights);
  TestResult ks = ks_one_sample(lat, latitude_cdf);
  return {extra == 0.0 && chi.p_value > kAlpha && ks.p_value > kAlpha,
          fmt::format("branch chi2 {:.3f} p {:.4g}; latitude KS D {:.5f} p {:.4g}; off-tree hits {}", chi.statistic,
                      chi.p_value, ks.statistic, ks.p_value, extra)};
}

Outcome free_coalescence() {
  // Four-leaf tree after one accepted breakpoint at 0.5: leaf 1 forks at
  // 0.125 and its new lineage joins leaf 3 at 0.5.
  PartialGraph g = four_leaf_tree();
  TraceState tr;
  tr.site = 0.5;
  tr.column = 1;
  tr.xi = g.branch(0).material.back();
  tr.steps.push_back({TraceStepKind::Start, 0.125, 0, {}, 0.0});
  tr.steps.push_back({TraceStepKind::Coalesce, 0.5, 2, {}, 0.0});
  tr.new_segments.emplace_back(0.125, 0.5);
  accept_breakpoint(g, 0.5, tr);

  const std::vector<double> cuts{0.0, 0.125, 0.25, 0.5, 0.75, 1.5};
  const std::vector<int> counts{4, 5, 4, 3, 2, 1};
  const double from = 0.1;
  auto cdf = [&](double t) {
    if (t <= from) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double lo = std::max(from, cuts[k]);
      const double hi = k + 1 < cuts.size() ? std::min(t, cuts[k + 1]) : t;
      if (hi > lo) acc += counts[k] * (hi - lo);
    }
    return 1.0 - std::exp(-acc);
  };

  int start = -1;
  for (int b : g.live_at(from)) {
    if (g.branch(b).material[0] == S({1})) start = b;
  }
  if (start < 0) return {false, "fixture has no leaf-1 branch at the start latitude"};
  Rng rng(0xC5);
  const std::size_t draws = 100000;
  std::vector<double> first;
  for (std::size_t k = 0; k < draws; ++k) {
    TraceState t = trace_lineage(g, {start, from}, 0.8, 1.0, BreakpointDensity::uniform(), rng);
    first.push_back(t.steps.at(1).latitude);
  }
  TestResult ks = ks_one_sample(first, cdf);
  return {ks.p_value > kAlpha,
          fmt::format("start latitude {}, KS D {:.5f} p {:.4g}", from, ks.statistic, ks.p_value)};
}

Outcome structural_validation() {
  const std::size_t per_engine = 10000;
  const std::vector<double> rhos{0.0, 0.5, 2.0};
  std::size_t failures = 0;
  std::string first;
  for (Engine e : {Engine::BackInTime, Engine::Spatial}) {
    std::vector<std::string> errors(per_engine);
    parallel_for(per_engine, thread_cap(), [&](std::size_t k) {
      SimConfig cfg;
      cfg.n_samples = 2 + static_cast<int>(k % 5);
      cfg.rho = rhos[(k / 5) % 3];
      cfg.seed = child_seed(0xC6, k);
      try {
        Arg a = simulate(e, cfg);
        ValidationReport r = validate_arg(a);
        if (!r.passed()) errors[k] = r.to_string();
      } catch (const std::exception& ex) {
        errors[k] = ex.what();
      }
    });
    for (std::size_t k = 0; k < per_engine; ++k) {
      if (errors[k].empty()) continue;
      ++failures;
      if (first.empty()) first = fmt::format("{} seed index {}: {}", engine_name(e), k, errors[k]);
    }
  }
  return {failures == 0, fmt::format("{} of {} paths failed validation{}", failures, 2 * per_engine,
                                     first.empty() ? "" : "; first: " + first)};
}

double quadrature_beta22(double lo, double hi) {
  auto p = [](double x) { return 6.0 * x * (1.0 - x); };
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(p, lo, hi, 15, 1e-15);
}

Outcome small_instances() {
  struct Case {
    const char* name;
    State x;
    double rho;
    double hand;
  };
  std::vector<Case> cases{{"two singletons", State::initial(2), 1.0, 2.0},
                          {"four lineages", fixtures::four_lineage_state(), 2.0, 9.1},
                          {"coalesced prefix", fixtures::coalesced_prefix_state(), 1.0, 1.7}};
  bool pass = true;
  double worst_u = 0.0;
  double worst_b = 0.0;
  for (const auto& c : cases) {
    const double q = total_rate(c.x, c.rho, BreakpointDensity::uniform()).total;
    const double eu = std::abs(q - c.hand) / c.hand;
    double expected = 0.5 * static_cast<double>(c.x.size() * (c.x.size() - 1));
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      auto iv = c.x.active_interval(i);
      if (!iv.empty()) expected += 0.5 * c.rho * quadrature_beta22(iv.begin, iv.end);
    }
    const double qb = total_rate(c.x, c.rho, BreakpointDensity::beta(2, 2)).total;
    const double eb = std::abs(qb - expected) / expected;
    worst_u = std::max(worst_u, eu);
    worst_b = std::max(worst_b, eb);
    pass = pass && eu <= 1e-12 && eb <= 1e-12;
  }
  return {pass, fmt::format("3 states; worst relative error uniform {:.3g}, beta(2,2) vs quadrature {:.3g} (limit 1e-12)",
                            worst_u, worst_b)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int sh(const std::string& args) {
  std::string cmd = std::string(ARGSIM_BINARY) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / fmt::format("argsim_accept_{}", ::getpid());
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::vector<std::string> mismatches;
  int runs = 0;
  auto same = [&](const std::string& label, const std::string& a, const std::string& b) {
    if (slurp(a).empty() || slurp(a) != slurp(b)) mismatches.push_back(label);
  };
  auto run = [&](const std::string& args) {
    ++runs;
    if (sh(args) != 0) mismatches.push_back("exit code of: " + args);
  };

  for (const char* sub : {"r1", "r2", "r3", "r4"}) fs::create_directories(dir / sub);
  for (const char* engine : {"backintime", "spatial"}) {
    const std::string e = engine;
    const std::string base = "simulate --engine " + e + " --samples 5 --rho 2 --density beta:2,3 --seed 808 --reps 300";
    const std::string log = e + ".jsonl";
    const std::string manifest = log + ".manifest.json";
    run(base + " --threads 1 --out " + p("r1/" + log));
    run(base + " --out " + p("r2/" + log));
    run("simulate --from-manifest " + p("r1/" + manifest) + " --out " + p("r3/" + log));
    for (const char* sub : {"r2/", "r3/"}) {
      same(e + " log " + sub, p("r1/" + log), p(sub + log));
      same(e + " manifest " + sub, p("r1/" + manifest), p(sub + manifest));
    }

    const std::string split = e + "_split.jsonl";
    run(base + " --split-bytes 4096 --out " + p("r1/" + split));
    run("simulate --from-manifest " + p("r1/" + split + ".manifest.json") + " --out " + p("r4/" + split));
    same(e + " split manifest", p("r1/" + split + ".manifest.json"), p("r4/" + split + ".manifest.json"));
    std::string joined;
    for (int r = 0; r < 300; ++r) {
      const std::string suffix = fmt::format(".r{}.jsonl", r);
      same(e + " split rerun " + suffix, p("r1/" + split + suffix), p("r4/" + split + suffix));
      joined += slurp(p("r1/" + split + suffix));
    }
    if (joined != slurp(p("r1/" + log))) mismatches.push_back(e + " split content");
  }
  run("simulate --engine spatial --samples 4 --rho 1 --seed 5 --reps 50 --trace-log " + p("tr1.jsonl") + " --out " +
      p("tr_a.jsonl"));
  run("simulate --engine spatial --samples 4 --rho 1 --seed 5 --reps 50 --trace-log " + p("tr2.jsonl") + " --out " +
      p("tr_b.jsonl"));
  same("trace log", p("tr1.jsonl"), p("tr2.jsonl"));
  run("compare --samples 3 --rho 1 --seed 9 --reps 2000 --sites 0,0.5 --out " + p("cmp1.csv"));
  run("compare --samples 3 --rho 1 --seed 9 --reps 2000 --sites 0,0.5 --threads 1 --out " + p("cmp2.csv"));
  same("compare csv", p("cmp1.csv"), p("cmp2.csv"));

  std::error_code ec;
  fs::remove_all(dir, ec);
  return {mismatches.empty(), fmt::format("{} CLI runs, {} mismatches{}", runs, mismatches.size(),
                                          mismatches.empty() ? "" : " (first: " + mismatches.front() + ")")};
}

Outcome mutation_sensitivity() {
  SimConfig cfg;
  cfg.n_samples = 4;
  cfg.rho = 1.0;
  cfg.seed = 0xC9;
  std::vector<double> sites{0.0, 0.5};
  RunOptions broken = parallel_options();
  broken.enforce_prefix_rule = false;
  const std::size_t reps = 100000;
  SimConfig ca = cfg;
  ca.seed = stream_seed(cfg.seed, 0);
  auto a = summarize_replicates(Engine::BackInTime, ca, reps, sites, broken);
  SimConfig cb = cfg;
  cb.seed = stream_seed(cfg.seed, 1);
  auto b = summarize_replicates(Engine::Spatial, cb, reps, sites, parallel_options());
  TestReport rep = compare_summaries(a, b, kAlpha);
  const TestRow& row = rep.row("breakpoints_chi2");
  return {row.p <= kAlpha, fmt::format("prefix rule disabled in back-in-time engine; |Bp| chi2 {:.2f} p {:.4g} "
                                       "(must be at most {})",
                                       row.stat, row.p, kAlpha)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, kingman_marginals},     {2, engine_equivalence}, {3, breakpoint_law},
      {4, uniform_location},      {5, free_coalescence},   {6, structural_validation},
      {7, small_instances},       {8, determinism},        {9, mutation_sensitivity},
  };
  std::cout << fmt::format("threads: {}\n", thread_cap());
  int failed = 0;
  for (const auto& [k, fn] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("criterion {} {}: {} [{:.1f} s]\n", k, o.pass ? "PASS" : "FAIL", o.detail, secs)
              << std::flush;
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed\n" : fmt::format("{} criteria failed\n", failed));
  return failed == 0 ? 0 : 1;
}
