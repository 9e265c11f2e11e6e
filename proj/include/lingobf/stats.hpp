#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lingobf/metrics.hpp"

namespace lingobf {

struct BootstrapResult {
  std::uint64_t seed = 0;
  std::size_t sets = 0;
  std::vector<double> set_scores;
};

// Each set draws one version p in [0, P_i] per problem, uniformly and
// independently, and scores the mean over problems of that version's
// question-averaged score. Set s uses stream derive_seed(seed, kBootstrapSet + s).
BootstrapResult bootstrap(const ScoreTensor& tensor, std::size_t sets, std::uint64_t seed);

nlohmann::json to_json(const BootstrapResult& result);
std::string bootstrap_csv(const BootstrapResult& result);

double mean(std::span<const double> values);
double stddev(std::span<const double> values);  // population

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

// Equal-width bins over [lo, hi]; the last bin is closed on the right.
Histogram histogram(std::span<const double> values, std::size_t bins, double lo = 0.0,
                    double hi = 1.0);
std::string histogram_csv(const Histogram& h);

struct RegressionResult {
  std::string difficulty;
  std::string model_group;
  std::size_t n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double se_slope = 0.0;
  double t_statistic = 0.0;  // 0 when slope and SE are both 0
};

// Ordinary least squares y = intercept + slope * x. Requires |x| == |y| >= 3
// and non-constant x; throws Error("degenerate_input") otherwise.
RegressionResult ols_fit(std::span<const double> x, std::span<const double> y);

// One fit of delta_obf^i on log10(speakers) per (difficulty, model group).
// `groups` maps a model name to its group; models without a group are
// skipped, as are cells with fewer than 3 points or constant x.
std::vector<RegressionResult> grouped_regressions(std::span<const MetricsReport> reports,
                                                  const std::map<std::string, std::string>& groups);
std::string regression_csv(std::span<const RegressionResult> rows);

// alpha / tests; throws Error("invalid_argument") when tests == 0.
double bonferroni(double alpha, std::size_t tests);

}  // namespace lingobf
