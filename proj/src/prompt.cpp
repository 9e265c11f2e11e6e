#include "lingobf/prompt.hpp"

#include <sstream>

#include "lingobf/error.hpp"

namespace lingobf {
using nlohmann::json;

std::string make_prompt_id(const std::string& variant_id, std::size_t question_index) {
  return variant_id + "/q" + std::to_string(question_index);
}

std::string json_skeleton(const std::vector<std::string>& keys) {
  std::string out = "{";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i > 0) out += ", ";
    out += json(keys[i]).dump() + ": \"\"";
  }
  return out + "}";
}

std::string render_question_block(const RenderedQuestion& question, std::size_t question_index) {
  std::string out = "Question " + std::to_string(question_index);
  if (!question.body.empty()) out += "\n" + question.body;
  for (const auto& sub : question.subquestions) out += "\n" + sub.key + ". " + sub.text;
  return out;
}

std::string render_question_sheet(const ProblemVariant& variant) {
  std::string out;
  for (std::size_t j = 0; j < variant.questions.size(); ++j) {
    if (j > 0) out += "\n\n";
    out += render_question_block(variant.questions[j], j + 1);
  }
  return out;
}

PromptInstance build_prompt(const ProblemVariant& variant, std::size_t question_index,
                            const PromptOptions& options) {
  if (question_index < 1 || question_index > variant.questions.size()) {
    throw Error("index_out_of_range", "question " + std::to_string(question_index) +
                                          " out of range for " + variant.variant_id() + " (" +
                                          std::to_string(variant.questions.size()) +
                                          " questions)");
  }
  const auto& question = variant.questions[question_index - 1];

  PromptInstance prompt;
  prompt.variant_id = variant.variant_id();
  prompt.prompt_id = make_prompt_id(prompt.variant_id, question_index);
  prompt.question_index = question_index;
  prompt.system_message = std::string(kSystemMessage);
  prompt.options = options;
  for (const auto& sub : question.subquestions) prompt.expected_keys.push_back(sub.key);

  std::string user;
  user += kPromptHeader;
  user += "\n" + render_question_sheet(variant) + "\n\n";
  user += kRespondLine;
  user += "\n" + variant.preamble + "\n";
  if (!options.no_context) user += variant.context + "\n";
  user += render_question_block(question, question_index) + "\n\n";
  if (options.guidance) user += *options.guidance + "\n\n";
  user += kInstructions;
  user += "\n" + json_skeleton(prompt.expected_keys) + "\n";
  prompt.user_message = std::move(user);
  return prompt;
}

std::vector<PromptInstance> build_prompts(const Dataset& dataset,
                                          std::optional<std::size_t> only_question,
                                          const PromptOptions& options) {
  std::vector<PromptInstance> out;
  for (const auto& variant : dataset.variants) {
    if (only_question) {
      out.push_back(build_prompt(variant, *only_question, options));
      continue;
    }
    for (std::size_t j = 1; j <= variant.questions.size(); ++j) {
      out.push_back(build_prompt(variant, j, options));
    }
  }
  return out;
}

json to_json(const PromptInstance& prompt) {
  return {{"prompt_id", prompt.prompt_id},
          {"system", prompt.system_message},
          {"user", prompt.user_message},
          {"expected_keys", prompt.expected_keys}};
}

PromptInstance prompt_from_json(const json& record) {
  PromptInstance prompt;
  prompt.prompt_id = record.at("prompt_id").get<std::string>();
  prompt.system_message = record.at("system").get<std::string>();
  prompt.user_message = record.at("user").get<std::string>();
  prompt.expected_keys = record.at("expected_keys").get<std::vector<std::string>>();
  const auto q = prompt.prompt_id.rfind("/q");
  if (q != std::string::npos) {
    prompt.variant_id = prompt.prompt_id.substr(0, q);
    const auto digits = prompt.prompt_id.substr(q + 2);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("malformed prompt_id " + prompt.prompt_id);
    }
    prompt.question_index = std::stoul(digits);
  }
  return prompt;
}

void save_prompts(const std::vector<PromptInstance>& prompts, const std::filesystem::path& path) {
  std::string out;
  for (const auto& p : prompts) out += to_json(p).dump() + "\n";
  write_text_file(path, out);
}

std::vector<PromptInstance> load_prompts(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<PromptInstance> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(prompt_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lingobf
