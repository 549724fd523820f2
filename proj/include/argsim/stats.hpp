#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "argsim/arg.hpp"
#include "argsim/backintime.hpp"
#include "argsim/replicates.hpp"

namespace argsim {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov distribution survival Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test with asymptotic p-value.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample KS against a CDF. Atoms are handled through the left limit
/// cdf(x-) at each sample value.
TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

/// Pearson goodness of fit; expected weights are rescaled to the observed
/// total. Throws std::invalid_argument when any expected count is below 5.
TestResult chi_square(std::span<const double> observed, std::span<const double> expected_weights);

/// Homogeneity test of two samples of counts (2 x k contingency table).
/// Adjacent values are pooled until every expected cell holds at least 5.
TestResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Two-sided z-test for equal means; statistic is z.
TestResult z_test_means(std::span<const double> a, std::span<const double> b);

struct KingmanExpectations {
  double tmrca = 0.0;
  double total_length = 0.0;
};
KingmanExpectations kingman_expectations(int n_samples);

struct TestRow {
  std::string statistic;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double stat = 0.0;
  double p = 1.0;
  bool pass = true;
};

struct TestReport {
  double alpha = 0.001;
  std::vector<TestRow> rows;

  bool passed() const;
  const TestRow& row(const std::string& statistic) const;
  std::string table() const;
  /// statistic,engineA_n,engineB_n,stat,p,pass
  std::string csv() const;
  std::string bonferroni_note() const;
};

/// Compares two batches of summaries row by row at level alpha.
TestReport compare_summaries(std::span<const SummaryStats> a, std::span<const SummaryStats> b, double alpha);

/// Runs both engines `reps` times (back-in-time as A, spatial as B) from
/// independent streams of config.seed and compares their summaries.
TestReport equivalence_report(const SimConfig& config, std::size_t reps, std::span<const double> sites,
                              double alpha, const RunOptions& options = {});

}  // namespace argsim
