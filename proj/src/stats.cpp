#include "lingobf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lingobf/rng.hpp"

namespace lingobf {
using nlohmann::json;

BootstrapResult bootstrap(const ScoreTensor& tensor, std::size_t sets, std::uint64_t seed) {
  BootstrapResult result;
  result.seed = seed;
  result.sets = sets;
  if (sets == 0) return result;
  const auto report = aggregate(tensor);
  if (report.problems.empty()) throw ValidationError("bootstrap needs at least one problem");

  std::vector<std::vector<Rational>> versions;
  for (const auto& p : report.problems) versions.push_back(p.version_scores);

  result.set_scores.reserve(sets);
  for (std::size_t s = 0; s < sets; ++s) {
    Rng rng(derive_seed(seed, stream::kBootstrapSet + s));
    Rational total = 0;
    for (const auto& v : versions) total += v[rng.below(v.size())];
    result.set_scores.push_back(to_double(total / versions.size()));
  }
  return result;
}

namespace {

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

json to_json(const BootstrapResult& result) {
  return {{"seed", result.seed}, {"sets", result.sets}, {"set_scores", result.set_scores}};
}

std::string bootstrap_csv(const BootstrapResult& result) {
  std::string out = "set,score\n";
  for (std::size_t s = 0; s < result.set_scores.size(); ++s) {
    out += std::to_string(s) + "," + fmt(result.set_scores[s]) + "\n";
  }
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (const double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw Error("invalid_argument", "histogram needs bins > 0, hi > lo");
  Histogram h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (const double v : values) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out += fmt(h.edges[b]) + "," + fmt(h.edges[b + 1]) + "," + std::to_string(h.counts[b]) + "\n";
  }
  return out;
}

RegressionResult ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("degenerate_input", "x and y differ in length");
  if (x.size() < 3) throw Error("degenerate_input", "regression needs at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("degenerate_input", "x is constant");

  RegressionResult r;
  r.n = x.size();
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ssr += e * e;
  }
  r.r_squared = syy == 0.0 ? 0.0 : std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  r.se_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  if (r.se_slope > 0.0) {
    r.t_statistic = r.slope / r.se_slope;
  } else if (r.slope != 0.0) {
    r.t_statistic = std::copysign(HUGE_VAL, r.slope);
  }
  return r;
}

std::vector<RegressionResult> grouped_regressions(std::span<const MetricsReport> reports,
                                                  const std::map<std::string, std::string>& groups) {
  std::map<std::pair<Difficulty, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      cells;
  for (const auto& report : reports) {
    const auto g = groups.find(report.model);
    if (g == groups.end()) continue;
    for (const auto& p : report.problems) {
      if (p.obfuscations == 0 || p.speakers == 0) continue;
      auto& [xs, ys] = cells[{p.difficulty, g->second}];
      xs.push_back(std::log10(static_cast<double>(p.speakers)));
      ys.push_back(to_double(p.delta));
    }
  }
  std::vector<RegressionResult> out;
  for (const auto& [key, data] : cells) {
    try {
      auto r = ols_fit(data.first, data.second);
      r.difficulty = std::string(to_string(key.first));
      r.model_group = key.second;
      out.push_back(std::move(r));
    } catch (const Error&) {
      continue;
    }
  }
  return out;
}

std::string regression_csv(std::span<const RegressionResult> rows) {
  std::string out = "difficulty,model_group,n,slope,intercept,r_squared,se_slope,t_statistic\n";
  for (const auto& r : rows) {
    out += r.difficulty + "," + r.model_group + "," + std::to_string(r.n) + "," + fmt(r.slope) +
           "," + fmt(r.intercept) + "," + fmt(r.r_squared) + "," + fmt(r.se_slope) + "," +
           fmt(r.t_statistic) + "\n";
  }
  return out;
}

double bonferroni(double alpha, std::size_t tests) {
  if (tests == 0) throw Error("invalid_argument", "bonferroni needs at least one test");
  return alpha / static_cast<double>(tests);
}

}  // namespace lingobf
