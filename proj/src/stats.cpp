#include "argsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "argsim/rng.hpp"

namespace argsim {

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kTiny = 1e-12;
  if (lambda < 1.18) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1;; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
      sum += term;
      if (term < kTiny * sum || term < kTiny) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1;; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < kTiny) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

namespace {

double ks_p(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb))};
}

TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    const double f_left = cdf(std::nextafter(x[i], -INFINITY));
    d = std::max({d, std::abs(static_cast<double>(j) / n - f), std::abs(static_cast<double>(i) / n - f_left)});
    i = j;
  }
  return {d, ks_p(d, n)};
}

TestResult chi_square(std::span<const double> observed, std::span<const double> expected_weights) {
  if (observed.size() != expected_weights.size() || observed.size() < 2) {
    throw std::invalid_argument("chi-square needs matching observed and expected bins, at least two");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double weight = std::accumulate(expected_weights.begin(), expected_weights.end(), 0.0);
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (!(expected_weights[k] > 0.0)) throw std::invalid_argument("expected weights must be positive");
    const double e = total * expected_weights[k] / weight;
    if (e < 5.0) throw std::invalid_argument(fmt::format("expected count {} in bin {} is below 5", e, k));
    stat += (observed[k] - e) * (observed[k] - e) / e;
  }
  const double dof = static_cast<double>(observed.size() - 1);
  return {stat, boost::math::gamma_q(dof / 2.0, stat / 2.0)};
}

TestResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chi-square needs two nonempty samples");
  std::map<std::uint64_t, std::pair<double, double>> table;
  for (auto v : a) table[v].first += 1.0;
  for (auto v : b) table[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double total = na + nb;
  const double need = 5.0 * total / std::min(na, nb);

  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> acc{0.0, 0.0};
  for (const auto& [value, counts] : table) {
    acc.first += counts.first;
    acc.second += counts.second;
    if (acc.first + acc.second >= need) {
      bins.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (bins.empty()) {
      bins.push_back(acc);
    } else {
      bins.back().first += acc.first;
      bins.back().second += acc.second;
    }
  }
  if (bins.size() < 2) return {0.0, 1.0};
  double stat = 0.0;
  for (const auto& [oa, ob] : bins) {
    const double col = oa + ob;
    const double ea = na * col / total;
    const double eb = nb * col / total;
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  const double dof = static_cast<double>(bins.size() - 1);
  return {stat, boost::math::gamma_q(dof / 2.0, stat / 2.0)};
}

TestResult z_test_means(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("z-test needs at least two values per sample");
  auto moments = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1.0) / n};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  const double se = std::sqrt(va + vb);
  if (se == 0.0) return {0.0, ma == mb ? 1.0 : 0.0};
  const double z = (ma - mb) / se;
  return {z, std::erfc(std::abs(z) / std::numbers::sqrt2)};
}

KingmanExpectations kingman_expectations(int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("sample size must be at least 2");
  double h = 0.0;
  for (int k = 1; k < n_samples; ++k) h += 1.0 / k;
  return {2.0 * (1.0 - 1.0 / n_samples), 2.0 * h};
}

bool TestReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const TestRow& r) { return r.pass; });
}

const TestRow& TestReport::row(const std::string& statistic) const {
  auto it = std::find_if(rows.begin(), rows.end(), [&](const TestRow& r) { return r.statistic == statistic; });
  if (it == rows.end()) throw std::out_of_range("no report row named " + statistic);
  return *it;
}

std::string TestReport::table() const {
  std::string out = fmt::format("{:<22} {:>10} {:>10} {:>12} {:>12}  {}\n", "statistic", "engineA_n", "engineB_n",
                                "stat", "p", "result");
  for (const auto& r : rows) {
    out += fmt::format("{:<22} {:>10} {:>10} {:>12.6g} {:>12.6g}  {}\n", r.statistic, r.n_a, r.n_b, r.stat, r.p,
                       r.pass ? "PASS" : "FAIL");
  }
  out += bonferroni_note() + "\n";
  return out;
}

std::string TestReport::csv() const {
  std::string out = "statistic,engineA_n,engineB_n,stat,p,pass\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.17g},{:.17g},{}\n", r.statistic, r.n_a, r.n_b, r.stat, r.p, r.pass ? 1 : 0);
  }
  return out;
}

std::string TestReport::bonferroni_note() const {
  return fmt::format("{} tests at alpha {} each; Bonferroni family-wise error bound {:.6g}", rows.size(), alpha,
                     std::min(1.0, alpha * static_cast<double>(rows.size())));
}

TestReport compare_summaries(std::span<const SummaryStats> a, std::span<const SummaryStats> b, double alpha) {
  if (a.empty() || b.empty()) throw std::invalid_argument("comparison needs replicates from both engines");
  TestReport report;
  report.alpha = alpha;
  auto add = [&](std::string name, TestResult r) {
    report.rows.push_back({std::move(name), a.size(), b.size(), r.statistic, r.p_value, r.p_value > alpha});
  };
  auto column = [](std::span<const SummaryStats> xs, auto get) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& s : xs) out.push_back(get(s));
    return out;
  };
  auto counts = [](std::span<const SummaryStats> xs, auto get) {
    std::vector<std::uint64_t> out;
    out.reserve(xs.size());
    for (const auto& s : xs) out.push_back(get(s));
    return out;
  };

  const auto& sites = a.front().sites;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    add(fmt::format("tmrca@{}", sites[k]),
        ks_two_sample(column(a, [k](const SummaryStats& s) { return s.tmrca_at[k]; }),
                      column(b, [k](const SummaryStats& s) { return s.tmrca_at[k]; })));
  }
  for (std::size_t k = 0; k < sites.size(); ++k) {
    add(fmt::format("length@{}", sites[k]),
        ks_two_sample(column(a, [k](const SummaryStats& s) { return s.length_at[k]; }),
                      column(b, [k](const SummaryStats& s) { return s.length_at[k]; })));
  }
  auto gmrca = [](const SummaryStats& s) { return s.grand_mrca_time; };
  add("grand_mrca", ks_two_sample(column(a, gmrca), column(b, gmrca)));
  auto bp = [](const SummaryStats& s) { return s.breakpoint_count; };
  auto ev = [](const SummaryStats& s) { return s.event_count; };
  add("breakpoints_chi2", chi_square_two_sample(counts(a, bp), counts(b, bp)));
  add("events_chi2", chi_square_two_sample(counts(a, ev), counts(b, ev)));
  auto bpd = [](const SummaryStats& s) { return static_cast<double>(s.breakpoint_count); };
  add("breakpoints_mean_z", z_test_means(column(a, bpd), column(b, bpd)));
  return report;
}

TestReport equivalence_report(const SimConfig& config, std::size_t reps, std::span<const double> sites,
                              double alpha, const RunOptions& options) {
  SimConfig ca = config;
  ca.seed = stream_seed(config.seed, 0);
  SimConfig cb = config;
  cb.seed = stream_seed(config.seed, 1);
  auto a = summarize_replicates(Engine::BackInTime, ca, reps, sites, options);
  auto b = summarize_replicates(Engine::Spatial, cb, reps, sites, options);
  return compare_summaries(a, b, alpha);
}

}  // namespace argsim
