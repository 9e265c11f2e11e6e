#pragma once

// Generated benchmark datasets: every problem rendered once unpermuted (p = 0)
// and once per sampled map (p = 1..P_i), persisted as
//
//   manifest.json   toolkit version, seed, per_problem, casing mode, problem
//                   table (id, difficulty, speakers, variant count) and a
//                   SHA-256 digest per variant and for the whole stream
//   variants.jsonl  one line per (variant, question)

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingobf/corpus.hpp"
#include "lingobf/ruleset.hpp"

namespace lingobf {

inline constexpr const char* kToolkitVersion = "0.3.0";

struct RenderedSubquestion {
  std::string key;
  std::string text;
  std::string answer;
  std::vector<std::string> alternates;
};

struct RenderedQuestion {
  std::string body;
  std::vector<RenderedSubquestion> subquestions;
};

struct ProblemVariant {
  std::string problem_id;
  std::size_t p = 0;  // 0 is the original
  PermutationMap map;
  Difficulty difficulty = Difficulty::Breakthrough;
  std::string preamble;
  std::string context;
  std::vector<RenderedQuestion> questions;

  std::string variant_id() const;
};

struct ProblemInfo {
  std::string id;
  Difficulty difficulty = Difficulty::Breakthrough;
  std::uint64_t speakers = 0;
  std::size_t variants = 0;  // 1 + P_i
};

struct Dataset {
  std::uint64_t seed = 0;
  std::size_t per_problem = 0;
  bool case_aware = true;
  std::vector<ProblemInfo> problems;
  std::vector<ProblemVariant> variants;  // grouped by problem, p ascending

  const ProblemVariant* find(const std::string& variant_id) const;
  std::size_t pair_count() const;
};

std::string make_variant_id(const std::string& problem_id, std::size_t p);

ProblemVariant render_variant(const Problem& problem, std::size_t p, const PermutationMap& map,
                              const GraphemeMatcher& matcher);

// Up to n distinct maps for a problem, drawn with
// sample_distinct(ruleset, n, derive_seed(seed, fnv1a64(id))) and keeping only
// maps that are stable (GraphemeMatcher::is_stable) on every Problemese span.
std::vector<PermutationMap> sample_problem_maps(const Problem& problem, std::size_t n,
                                                std::uint64_t seed, const GraphemeMatcher& matcher);

// Per problem: the original plus sample_problem_maps(problem, per_problem, seed).
Dataset build_dataset(const Corpus& corpus, std::size_t per_problem, std::uint64_t seed,
                      ObfuscationOptions options = {});

std::vector<std::string> variant_lines(const ProblemVariant& variant);
nlohmann::json dataset_manifest(const Dataset& dataset);

// Writes manifest.json and variants.jsonl; returns the stream digest.
std::string save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

struct LevelCounts {
  std::size_t unobfuscated = 0;
  std::size_t obfuscated = 0;
};

struct CorpusStats {
  std::map<Difficulty, LevelCounts> by_difficulty;    // every level present
  std::map<std::string, LevelCounts> by_answer_type;  // keyed by to_string(AnswerType)
  LevelCounts total;

  double percent(std::size_t count, std::size_t of) const {
    return of == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(of);
  }
  std::string to_csv() const;
  std::string to_markdown() const;
};

CorpusStats corpus_stats(const Dataset& dataset);
CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace lingobf
