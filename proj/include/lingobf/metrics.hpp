#pragma once

// Exact-match score tensors and their aggregates.
//
// L(i, j, k, p) is stored per question as a row-major version x subquestion
// grid. All aggregates are computed in exact rational arithmetic; doubles are
// produced only for export.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "lingobf/answer.hpp"
#include "lingobf/corpus.hpp"
#include "lingobf/dataset.hpp"
#include "lingobf/eval_runner.hpp"

namespace lingobf {

using Rational = boost::multiprecision::cpp_rational;

struct ScoredQuestion {
  std::vector<std::string> keys;
  std::vector<AnswerType> answer_types;  // from the original gold answer
  std::vector<std::uint8_t> cells;       // cells[p * m() + k]

  std::size_t m() const { return keys.size(); }
  std::uint8_t at(std::size_t k, std::size_t p) const { return cells[p * m() + k]; }
  std::uint8_t& at(std::size_t k, std::size_t p) { return cells[p * m() + k]; }
};

struct ScoredProblem {
  std::string id;
  Difficulty difficulty = Difficulty::Breakthrough;
  std::uint64_t speakers = 0;
  std::size_t versions = 1;  // 1 + P_i
  std::vector<ScoredQuestion> questions;

  std::size_t obfuscations() const { return versions - 1; }
};

// A cell scored 0 because no usable answer existed.
struct MissingAnswer {
  std::string prompt_id;
  std::string key;
  std::string reason;  // missing_record, missing_key, empty, bad_parsing, transport_error
};

struct ScoreTensor {
  std::string model;
  bool case_sensitive = true;
  std::vector<ScoredProblem> problems;
  std::vector<MissingAnswer> missing;
};

// Shape with every cell 0; used by tests and generators.
ScoredProblem make_scored_problem(std::string id, std::size_t versions,
                                  std::span<const std::size_t> subquestions_per_question);

// Throws ValidationError on shape violations (no questions, P_i = 0 is allowed,
// cells not binary, size mismatch).
void check_tensor(const ScoreTensor& tensor);

// Throws Error("unknown_prompt") for a record whose prompt_id has no question
// in the dataset.
ScoreTensor score_run(std::span<const ResponseRecord> records, const Dataset& dataset,
                      std::string model, MatchOptions options = {});

nlohmann::json to_json(const ScoreTensor& tensor);
ScoreTensor tensor_from_json(const nlohmann::json& doc);
void save_tensor(const ScoreTensor& tensor, const std::filesystem::path& path);
ScoreTensor load_tensor(const std::filesystem::path& path);

struct AggregateOptions {
  bool robust_min_includes_original = true;
};

struct Aggregate {
  std::size_t problems = 0;
  std::size_t obfuscated_problems = 0;  // problems with P_i >= 1
  Rational m_og;
  Rational m_obf;
  Rational m_rob;
};

struct ProblemMetrics {
  std::string id;
  Difficulty difficulty = Difficulty::Breakthrough;
  std::uint64_t speakers = 0;
  std::size_t obfuscations = 0;
  Rational m_og;
  Rational m_obf;  // 0 when obfuscations == 0
  Rational m_rob;
  std::vector<Rational> version_scores;  // size 1 + P_i
  std::vector<Rational> delta_by_version;  // delta_obf^{i,p} for p = 1..P_i
  Rational delta;                          // mean of delta_by_version, 0 if empty
};

struct TypeCounts {
  std::size_t original_pairs = 0;
  std::size_t original_correct = 0;
  std::size_t obfuscated_pairs = 0;
  std::size_t obfuscated_correct = 0;

  Rational original_score() const;
  Rational obfuscated_score() const;
};

struct MetricsReport {
  std::string model;
  bool case_sensitive = true;
  AggregateOptions options;
  Aggregate overall;
  std::map<Difficulty, Aggregate> by_difficulty;  // levels that occur only
  std::vector<ProblemMetrics> problems;
  std::map<AnswerType, TypeCounts> by_answer_type;
};

MetricsReport aggregate(const ScoreTensor& tensor, AggregateOptions options = {});

// Fixed-point decimal, rounded half away from zero.
std::string format_decimal(const Rational& value, int digits = 6);
double to_double(const Rational& value);

nlohmann::json summary_json(const MetricsReport& report);
std::string per_problem_csv(const MetricsReport& report);
std::string answer_type_csv(const MetricsReport& report);
// Rows are problems (sorted by id), columns are models, cells delta_obf^i.
std::string delta_heatmap_csv(std::span<const MetricsReport> reports);

}  // namespace lingobf
