// lingobf: corpus validation, variant generation, prompting, evaluation and
// reporting from the command line.

#include <atomic>
#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lingobf/corpus.hpp"
#include "lingobf/dataset.hpp"
#include "lingobf/eval_runner.hpp"
#include "lingobf/metrics.hpp"
#include "lingobf/prompt.hpp"
#include "lingobf/ruleset.hpp"
#include "lingobf/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lingobf;

namespace {

std::atomic<bool> g_cancel{false};

void on_signal(int) { g_cancel.store(true); }

void diagnose(const std::string& kind, const std::string& message,
              const std::vector<std::string>& details = {}) {
  json d = {{"error", kind}, {"message", message}};
  if (!details.empty()) d["details"] = details;
  std::cerr << d.dump() << '\n';
}

void report_load_failures(const LoadReport& report) {
  for (const auto& f : report.failures) diagnose("invalid_problem", f.problem, f.reasons);
  for (const auto& w : report.warnings) std::cerr << json{{"warning", w}}.dump() << '\n';
}

ObfuscationOptions obfuscation_options(bool case_aware) {
  ObfuscationOptions o;
  o.case_aware = case_aware;
  return o;
}

int cmd_validate(const fs::path& corpus_dir, bool case_aware) {
  const auto corpus = load_corpus(corpus_dir, obfuscation_options(case_aware));
  report_load_failures(corpus.report);
  json out = {{"problems", corpus.problems.size()},
              {"failures", corpus.report.failures.size()},
              {"valid", corpus.report.ok() && !corpus.problems.empty()}};
  std::cout << out.dump() << '\n';
  return out["valid"].get<bool>() ? 0 : 1;
}

Corpus load_clean_corpus(const fs::path& dir, bool case_aware) {
  auto corpus = load_corpus(dir, obfuscation_options(case_aware));
  report_load_failures(corpus.report);
  if (!corpus.report.ok()) throw ValidationError("corpus has invalid problems; run validate");
  if (corpus.problems.empty()) throw ValidationError("corpus is empty");
  return corpus;
}

int cmd_sample(const fs::path& corpus_dir, std::size_t per_problem, std::uint64_t seed) {
  const auto corpus = load_clean_corpus(corpus_dir, true);
  for (const auto& problem : corpus.problems) {
    const GraphemeMatcher matcher(problem.ruleset);
    const auto maps = sample_problem_maps(problem, per_problem, seed, matcher);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const json line = {{"problem_id", problem.id}, {"p", i + 1}, {"map", lingobf::to_json(maps[i])}};
      std::cout << line.dump() << '\n';
    }
  }
  return 0;
}

int cmd_generate(const fs::path& corpus_dir, std::size_t per_problem, std::uint64_t seed,
                 const fs::path& out, bool case_aware) {
  const auto corpus = load_clean_corpus(corpus_dir, case_aware);
  const auto dataset = build_dataset(corpus, per_problem, seed, obfuscation_options(case_aware));
  const auto digest = save_dataset(dataset, out);
  std::cout << json{{"dataset", out.string()},
                    {"digest", digest},
                    {"variants", dataset.variants.size()},
                    {"pairs", dataset.pair_count()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_prompt(const fs::path& dataset_dir, std::optional<std::size_t> question, bool no_context,
               const std::optional<fs::path>& guidance, const fs::path& out) {
  const auto dataset = load_dataset(dataset_dir);
  PromptOptions options;
  options.no_context = no_context;
  if (guidance) options.guidance = read_text_file(*guidance);
  const auto prompts = build_prompts(dataset, question, options);
  save_prompts(prompts, out);
  std::cout << json{{"prompts", prompts.size()}, {"out", out.string()}}.dump() << '\n';
  return 0;
}

int cmd_run(const fs::path& prompts_path, const fs::path& endpoint_path, std::size_t parallelism,
            const fs::path& out) {
  const auto prompts = load_prompts(prompts_path);
  const auto endpoint = load_endpoint(endpoint_path);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  RunOptions options;
  options.parallelism = parallelism;
  options.cancel = &g_cancel;
  const auto summary = run(prompts, endpoint, out, http_transport(), options);
  const auto errors = summarize_errors(out);
  std::cout << json{{"total", summary.total},
                    {"already_final", summary.already_final},
                    {"completed", summary.completed},
                    {"cancelled", summary.cancelled},
                    {"empty", errors.empty},
                    {"bad_parsing", errors.bad_parsing},
                    {"transport_error", errors.transport_error}}
                   .dump()
            << '\n';
  return summary.cancelled ? 1 : 0;
}

std::string run_model_name(const fs::path& run_dir) {
  return summarize_errors(run_dir).endpoint;
}

int cmd_score(const fs::path& run_dir, const fs::path& dataset_dir, bool case_insensitive,
              const fs::path& out) {
  if (!fs::exists(run_dir / "records.jsonl")) {
    throw IoError("no records.jsonl in " + run_dir.string());
  }
  const auto records = load_records(run_dir);
  const auto dataset = load_dataset(dataset_dir);
  MatchOptions options;
  options.case_sensitive = !case_insensitive;
  const auto tensor = score_run(records, dataset, run_model_name(run_dir), options);
  save_tensor(tensor, out);
  std::cout << json{{"model", tensor.model},
                    {"problems", tensor.problems.size()},
                    {"missing", tensor.missing.size()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_bootstrap(const fs::path& scores, std::size_t sets, std::uint64_t seed, std::size_t bins,
                  const fs::path& out) {
  const auto tensor = load_tensor(scores);
  const auto result = bootstrap(tensor, sets, seed);
  fs::create_directories(out);
  write_text_file(out / "bootstrap.json", to_json(result).dump(2) + "\n");
  write_text_file(out / "bootstrap.csv", bootstrap_csv(result));
  write_text_file(out / "histogram.csv", histogram_csv(histogram(result.set_scores, bins)));
  std::cout << json{{"model", tensor.model},
                    {"sets", result.sets},
                    {"mean", mean(result.set_scores)},
                    {"stddev", stddev(result.set_scores)}}
                   .dump()
            << '\n';
  return 0;
}

std::string markdown_report(std::span<const MetricsReport> reports,
                            std::span<const ErrorSummary> errors,
                            std::span<const RegressionResult> regressions) {
  std::ostringstream md;
  md << "# Evaluation report\n\n## Overall\n\n"
     << "| Model | Problems | M_og | M_obf | M_rob |\n|---|---:|---:|---:|---:|\n";
  for (const auto& r : reports) {
    md << "| " << r.model << " | " << r.overall.problems << " | " << format_decimal(r.overall.m_og, 4)
       << " | " << format_decimal(r.overall.m_obf, 4) << " | "
       << format_decimal(r.overall.m_rob, 4) << " |\n";
  }
  md << "\n## By difficulty\n\n| Model | Difficulty | Problems | M_og | M_obf | M_rob |\n"
     << "|---|---|---:|---:|---:|---:|\n";
  for (const auto& r : reports) {
    for (const auto& [level, a] : r.by_difficulty) {
      md << "| " << r.model << " | " << to_string(level) << " | " << a.problems << " | "
         << format_decimal(a.m_og, 4) << " | " << format_decimal(a.m_obf, 4) << " | "
         << format_decimal(a.m_rob, 4) << " |\n";
    }
  }
  md << "\n## By answer type\n\n| Model | Answer type | Original | Obfuscated |\n"
     << "|---|---|---:|---:|\n";
  for (const auto& r : reports) {
    for (const auto& [type, c] : r.by_answer_type) {
      md << "| " << r.model << " | " << to_string(type) << " | "
         << format_decimal(c.original_score(), 4) << " | "
         << format_decimal(c.obfuscated_score(), 4) << " |\n";
    }
  }
  if (!errors.empty()) md << "\n## Response errors\n\n" << error_summary_markdown(errors);
  if (!regressions.empty()) {
    md << "\n## Resourcedness regressions\n\n"
       << "| Difficulty | Group | n | Slope | Intercept | R² | SE | t |\n"
       << "|---|---|---:|---:|---:|---:|---:|---:|\n";
    char line[256];
    for (const auto& g : regressions) {
      std::snprintf(line, sizeof(line), "| %s | %s | %zu | %.4f | %.4f | %.4f | %.4f | %.3f |\n",
                    g.difficulty.c_str(), g.model_group.c_str(), g.n, g.slope, g.intercept,
                    g.r_squared, g.se_slope, g.t_statistic);
      md << line;
    }
  }
  return md.str();
}

int cmd_report(const std::vector<fs::path>& score_files, const std::vector<fs::path>& run_dirs,
               const std::optional<fs::path>& groups_path,
               const std::optional<fs::path>& dataset_dir, bool include_original,
               const fs::path& out) {
  AggregateOptions options;
  options.robust_min_includes_original = include_original;
  std::vector<MetricsReport> reports;
  for (const auto& path : score_files) reports.push_back(aggregate(load_tensor(path), options));

  std::vector<ErrorSummary> errors;
  for (const auto& dir : run_dirs) errors.push_back(summarize_errors(dir));

  std::vector<RegressionResult> regressions;
  if (groups_path) {
    const auto doc = json::parse(read_text_file(*groups_path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ValidationError(groups_path->string() + ": expected {\"model\": \"group\"}");
    }
    regressions = grouped_regressions(reports, doc.get<std::map<std::string, std::string>>());
  }

  fs::create_directories(out);
  json summaries = json::array();
  std::string per_problem;
  std::string types;
  for (const auto& r : reports) {
    summaries.push_back(summary_json(r));
    const auto p = per_problem_csv(r);
    const auto t = answer_type_csv(r);
    per_problem += per_problem.empty() ? p : p.substr(p.find('\n') + 1);
    types += types.empty() ? t : t.substr(t.find('\n') + 1);
  }
  write_text_file(out / "summary.json", summaries.dump(2) + "\n");
  write_text_file(out / "per_problem.csv", per_problem);
  write_text_file(out / "answer_types.csv", types);
  write_text_file(out / "delta_heatmap.csv", delta_heatmap_csv(reports));
  if (!errors.empty()) {
    write_text_file(out / "errors.csv", error_summary_csv(errors));
    write_text_file(out / "errors.md", error_summary_markdown(errors));
  }
  if (groups_path) write_text_file(out / "regressions.csv", regression_csv(regressions));
  if (dataset_dir) {
    const auto stats = corpus_stats(load_dataset(*dataset_dir));
    write_text_file(out / "corpus_stats.csv", stats.to_csv());
    write_text_file(out / "corpus_stats.md", stats.to_markdown());
  }
  write_text_file(out / "report.md", markdown_report(reports, errors, regressions));
  std::cout << json{{"models", reports.size()}, {"out", out.string()}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grapheme-permutation obfuscation toolkit for linguistics puzzle benchmarks",
               "lingobf"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  fs::path corpus_dir;
  fs::path dataset_dir;
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t per_problem = 6;
  bool case_aware = true;

  auto* validate = app.add_subcommand("validate", "Check rulesets, annotations and coverage");
  validate->add_option("corpus", corpus_dir, "Corpus directory")->required();
  validate->add_option("--case-aware", case_aware, "Case-aware grapheme matching")
      ->default_val(true);

  auto* sample = app.add_subcommand("sample", "Print sampled permutation maps as JSON lines");
  sample->add_option("corpus", corpus_dir, "Corpus directory")->required();
  sample->add_option("--per-problem", per_problem, "Maps per problem")->default_val(6);
  sample->add_option("--seed", seed, "Random seed")->required();

  auto* generate = app.add_subcommand("generate", "Build an obfuscated dataset");
  generate->add_option("corpus", corpus_dir, "Corpus directory")->required();
  generate->add_option("--per-problem", per_problem, "Obfuscations per problem")->default_val(6);
  generate->add_option("--seed", seed, "Random seed")->required();
  generate->add_option("--out", out, "Output dataset directory")->required();
  generate->add_option("--case-aware", case_aware, "Case-aware grapheme matching")
      ->default_val(true);

  std::optional<std::size_t> question;
  bool no_context = false;
  std::optional<fs::path> guidance;
  auto* prompt = app.add_subcommand("prompt", "Render prompts for a dataset");
  prompt->add_option("dataset", dataset_dir, "Dataset directory")->required();
  prompt->add_option("--question", question, "Only this question (1-based)");
  prompt->add_flag("--no-context", no_context, "Drop the context section");
  prompt->add_option("--guidance", guidance, "File with extra guidance text")->check(CLI::ExistingFile);
  prompt->add_option("--out", out, "Output prompts file (JSON lines)")->required();

  fs::path prompts_path;
  fs::path endpoint_path;
  std::size_t parallelism = 4;
  auto* run_cmd = app.add_subcommand("run", "Send prompts to an endpoint");
  run_cmd->add_option("--prompts", prompts_path, "Prompts file")->required();
  run_cmd->add_option("--endpoint", endpoint_path, "Endpoint config file")->required();
  run_cmd->add_option("--parallelism", parallelism, "Maximum requests in flight")
      ->default_val(4)
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out, "Run directory")->required();

  fs::path run_dir;
  bool case_insensitive = false;
  auto* score = app.add_subcommand("score", "Score a run against a dataset");
  score->add_option("--run", run_dir, "Run directory")->required();
  score->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  score->add_flag("--case-insensitive", case_insensitive, "Ignore case in exact match");
  score->add_option("--out", out, "Output score file")->required();

  fs::path scores_path;
  std::size_t sets = 500;
  std::size_t bins = 20;
  auto* boot = app.add_subcommand("bootstrap", "Bootstrap the overall score distribution");
  boot->add_option("--scores", scores_path, "Score file")->required();
  boot->add_option("--sets", sets, "Bootstrap sets")->default_val(500);
  boot->add_option("--seed", seed, "Random seed")->required();
  boot->add_option("--bins", bins, "Histogram bins")->default_val(20)->check(CLI::PositiveNumber);
  boot->add_option("--out", out, "Output directory")->required();

  std::vector<fs::path> score_files;
  std::vector<fs::path> run_dirs;
  std::optional<fs::path> groups;
  std::optional<fs::path> stats_dataset;
  bool include_original = true;
  auto* report = app.add_subcommand("report", "Metrics, error tables and regressions");
  report->add_option("--scores", score_files, "Score files, one per model")->required();
  report->add_option("--run", run_dirs, "Run directories for the error table");
  report->add_option("--groups", groups, "JSON file mapping model name to group");
  report->add_option("--dataset", stats_dataset, "Dataset for corpus statistics");
  report->add_option("--include-original-in-robust-min", include_original,
                     "Let the original version count in M_rob's minimum")
      ->default_val(true);
  report->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(corpus_dir, case_aware);
    if (*sample) return cmd_sample(corpus_dir, per_problem, seed);
    if (*generate) return cmd_generate(corpus_dir, per_problem, seed, out, case_aware);
    if (*prompt) return cmd_prompt(dataset_dir, question, no_context, guidance, out);
    if (*run_cmd) return cmd_run(prompts_path, endpoint_path, parallelism, out);
    if (*score) return cmd_score(run_dir, dataset_dir, case_insensitive, out);
    if (*boot) return cmd_bootstrap(scores_path, sets, seed, bins, out);
    if (*report) {
      return cmd_report(score_files, run_dirs, groups, stats_dataset, include_original, out);
    }
  } catch (const ValidationError& e) {
    diagnose(e.kind(), e.what(), e.details());
    return 1;
  } catch (const CoverageError& e) {
    diagnose(e.kind(), e.what(), e.uncovered());
    return 1;
  } catch (const Error& e) {
    diagnose(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    diagnose("io_error", e.what());
    return 1;
  }
  return 0;
}
