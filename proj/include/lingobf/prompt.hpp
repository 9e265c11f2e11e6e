#pragma once

// Prompt assembly. The user message is, in order:
//
//   fixed header sentence
//   question sheet (every question of the problem with its sub-questions)
//   "Now respond to the following questions:"
//   preamble
//   context                 (omitted entirely in no-context mode)
//   question j with its sub-questions
//   guidance block          (only when guidance is given)
//   instructions
//   JSON skeleton {"<key>": "", ...}
//
// The system message is always kSystemMessage.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lingobf/dataset.hpp"

namespace lingobf {

inline constexpr std::string_view kSystemMessage = "You are a helpful assistant.";

inline constexpr std::string_view kPromptHeader =
    "Below is a problem sheet from a linguistics exam. You will first see the entire sheet, then "
    "be asked to respond to specific questions from the sheet. Your answers to the questions "
    "should rely only on reasoning about the information provided in the sheet.";

inline constexpr std::string_view kRespondLine = "Now respond to the following questions:";

inline constexpr std::string_view kInstructions =
    "Only respond with json output. Do not include anything other than the json in your "
    "response. Format your response as a json file with the keys as provided below:";

struct PromptOptions {
  bool no_context = false;
  std::optional<std::string> guidance;
};

struct PromptInstance {
  std::string prompt_id;
  std::string variant_id;
  std::size_t question_index = 1;  // 1-based
  std::string system_message;
  std::string user_message;
  std::vector<std::string> expected_keys;
  PromptOptions options;
};

std::string make_prompt_id(const std::string& variant_id, std::size_t question_index);

// `{"1": "", "2": ""}` for keys 1, 2.
std::string json_skeleton(const std::vector<std::string>& keys);

std::string render_question_block(const RenderedQuestion& question, std::size_t question_index);
std::string render_question_sheet(const ProblemVariant& variant);

// question_index is 1-based. Throws Error("index_out_of_range").
PromptInstance build_prompt(const ProblemVariant& variant, std::size_t question_index,
                            const PromptOptions& options = {});

// Every question of every variant, or only question `only_question` when set.
std::vector<PromptInstance> build_prompts(const Dataset& dataset,
                                          std::optional<std::size_t> only_question,
                                          const PromptOptions& options = {});

// Export record {prompt_id, system, user, expected_keys}.
nlohmann::json to_json(const PromptInstance& prompt);
PromptInstance prompt_from_json(const nlohmann::json& record);

void save_prompts(const std::vector<PromptInstance>& prompts, const std::filesystem::path& path);
std::vector<PromptInstance> load_prompts(const std::filesystem::path& path);

}  // namespace lingobf
