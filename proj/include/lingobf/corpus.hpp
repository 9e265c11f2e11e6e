#pragma once

// Problems as stored on disk: one directory per problem holding
//
//   problem.txt    annotated text split into sections by `%%` directive lines:
//                    %% preamble
//                    %% context
//                    %% question        (repeated; body text follows)
//                    %% sub <key>       (repeated within a question)
//                  Lines starting with `%% #` are comments.
//   answers.json   {"schema_version": 1,
//                   "answers": [ {"<key>": "<answer>" | {"answer": ..., "alternates": [...]}}, ... ]}
//                  one object per question, in order
//   ruleset.json   see ruleset.hpp
//   meta.json      {"schema_version": 1, "id": ..., "difficulty": "Advanced" | [...],
//                   "language": {"name": ..., "speakers": N}}
//
// All text is NFC-normalized on load.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingobf/annotation.hpp"
#include "lingobf/obfuscation.hpp"
#include "lingobf/ruleset.hpp"

namespace lingobf {

enum class Difficulty { Breakthrough, Foundation, Intermediate, Advanced, Round2 };

inline constexpr Difficulty kDifficulties[] = {Difficulty::Breakthrough, Difficulty::Foundation,
                                               Difficulty::Intermediate, Difficulty::Advanced,
                                               Difficulty::Round2};

std::string_view to_string(Difficulty level);
Difficulty difficulty_from_string(std::string_view name);  // accepts "Round 2"
// A problem listed under several levels counts at the lowest.
Difficulty lowest_difficulty(std::span<const Difficulty> levels);

struct LanguageMeta {
  std::string name;
  std::uint64_t speakers = 0;
};

struct Subquestion {
  std::string key;
  AnnotatedDocument text;
  std::string answer;  // may contain @@@ spans
  std::vector<std::string> alternates;
};

struct Question {
  AnnotatedDocument body;
  std::vector<Subquestion> subquestions;
};

struct Problem {
  std::string id;
  Difficulty difficulty = Difficulty::Breakthrough;
  LanguageMeta language_meta;  // never rendered into prompt text
  AnnotatedDocument preamble;
  AnnotatedDocument context;
  std::vector<Question> questions;
  Ruleset ruleset;

  std::size_t pair_count() const;

  // Text of every @@@ span in documents, answers and alternates.
  std::vector<std::string> problemese_spans() const;
};

struct ProblemText {
  AnnotatedDocument preamble;
  AnnotatedDocument context;
  std::vector<Question> questions;  // answers left empty
};

// Parses the `%%` section format. Throws ParseError.
ProblemText parse_problem_text(std::string_view text);

struct LoadFailure {
  std::string problem;
  std::vector<std::string> reasons;
};

struct LoadReport {
  std::vector<LoadFailure> failures;
  std::vector<std::string> warnings;

  bool ok() const { return failures.empty(); }
};

struct Corpus {
  std::vector<Problem> problems;  // sorted by id
  LoadReport report;
};

// Loads and checks one problem directory. Throws ValidationError whose
// details list every problem found (parse errors, ruleset violations,
// coverage gaps, missing answers, language-name leaks).
Problem load_problem(const std::filesystem::path& dir, ObfuscationOptions options = {});

// Problems that fail to load are listed in the report and left out.
Corpus load_corpus(const std::filesystem::path& dir, ObfuscationOptions options = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lingobf
