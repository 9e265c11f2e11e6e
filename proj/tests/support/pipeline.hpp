#pragma once

// The full command-line pipeline against the fixture corpus and the mock
// endpoint, as used by the golden-run tests.

#include <fstream>
#include <sstream>

#include "lingobf/corpus.hpp"
#include "lingobf/digest.hpp"
#include "support.hpp"

namespace support {

struct PipelineResult {
  std::vector<std::string> failures;  // steps that did not exit as expected
  std::map<std::string, std::string> digests;  // artifact -> sha256
  lingobf::ErrorSummary errors;
  std::size_t requests = 0;
};

inline const std::set<std::string>& planted_empty() {
  static const std::set<std::string> ids = {"harmony/p1/q1", "nouns/p3/q2"};
  return ids;
}

inline const std::set<std::string>& planted_bad() {
  static const std::set<std::string> ids = {"voicing/p2/q2"};
  return ids;
}

// Records carry timestamps and latencies, and the run manifest carries the
// mock's port, so neither is part of the golden set.
inline const std::vector<std::string>& golden_artifacts() {
  static const std::vector<std::string> names = {
      "dataset/manifest.json",  "dataset/variants.jsonl",  "prompts.jsonl",
      "scores.json",            "report/summary.json",     "report/per_problem.csv",
      "report/answer_types.csv", "report/delta_heatmap.csv", "report/errors.csv",
      "report/errors.md",       "report/corpus_stats.csv", "report/corpus_stats.md",
      "report/report.md"};
  return names;
}

inline PipelineResult run_pipeline(const fs::path& cli, const fs::path& work) {
  PipelineResult result;
  const auto log = work / "pipeline.log";
  auto step = [&](const std::string& name, const std::string& args) {
    const auto cmd = quote(cli) + " " + args + " >>" + quote(log) + " 2>&1";
    if (run_command(cmd) != 0) result.failures.push_back(name);
  };
  const auto corpus = fixture("corpus");
  step("validate", "validate " + quote(corpus));
  step("generate", "generate " + quote(corpus) + " --per-problem 6 --seed 7 --out " +
                       quote(work / "dataset"));
  step("prompt", "prompt " + quote(work / "dataset") + " --out " + quote(work / "prompts.jsonl"));
  if (!result.failures.empty()) return result;

  const auto dataset = lingobf::load_dataset(work / "dataset");
  const auto prompts = lingobf::load_prompts(work / "prompts.jsonl");
  {
    MockEndpoint mock(dataset, prompts, planted_empty(), planted_bad());
    const json endpoint = {{"name", "mock-model"},
                           {"url", mock.url()},
                           {"timeout_s", 10},
                           {"max_retries", 1},
                           {"backoff_ms", 1}};
    lingobf::write_text_file(work / "endpoint.json", endpoint.dump(2));
    step("run", "run --prompts " + quote(work / "prompts.jsonl") + " --endpoint " +
                    quote(work / "endpoint.json") + " --parallelism 4 --out " +
                    quote(work / "run"));
    result.requests = mock.requests();
  }
  step("score", "score --run " + quote(work / "run") + " --dataset " + quote(work / "dataset") +
                    " --out " + quote(work / "scores.json"));
  step("report", "report --scores " + quote(work / "scores.json") + " --run " +
                     quote(work / "run") + " --dataset " + quote(work / "dataset") + " --out " +
                     quote(work / "report"));
  for (const auto& name : golden_artifacts()) {
    if (fs::exists(work / name)) {
      result.digests[name] = lingobf::sha256_hex(lingobf::read_text_file(work / name));
    }
  }
  if (fs::exists(work / "run" / "records.jsonl")) {
    result.errors = lingobf::summarize_errors(work / "run");
  }
  return result;
}

inline fs::path golden_path() { return fixture("golden/e2e_digests.json"); }

// Compares against the stored digests, or rewrites them when
// LINGOBF_UPDATE_GOLDEN is set.
inline std::vector<std::string> check_golden(const std::map<std::string, std::string>& digests) {
  if (std::getenv("LINGOBF_UPDATE_GOLDEN") != nullptr) {
    fs::create_directories(golden_path().parent_path());
    lingobf::write_text_file(golden_path(), json(digests).dump(2) + "\n");
    return {};
  }
  std::vector<std::string> mismatches;
  if (!fs::exists(golden_path())) return {"golden file missing: " + golden_path().string()};
  const auto golden =
      json::parse(lingobf::read_text_file(golden_path())).get<std::map<std::string, std::string>>();
  for (const auto& name : golden_artifacts()) {
    const auto g = golden.find(name);
    const auto d = digests.find(name);
    if (g == golden.end() || d == digests.end() || g->second != d->second) {
      mismatches.push_back(name);
    }
  }
  return mismatches;
}

}  // namespace support
