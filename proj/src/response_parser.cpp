#include <regex>

#include "lingobf/eval_runner.hpp"

namespace lingobf {
using nlohmann::json;

namespace {

bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::optional<AnswerMap> as_answer_map(const json& value) {
  if (!value.is_object()) return std::nullopt;
  AnswerMap out;
  for (const auto& [key, v] : value.items()) {
    if (v.is_null()) continue;
    out[key] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

std::optional<AnswerMap> parse_object(std::string_view text) {
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;
  return as_answer_map(doc);
}

std::optional<AnswerMap> from_fence(std::string_view raw) {
  static const std::regex fence(R"(```[A-Za-z]*[ \t]*\r?\n?([\s\S]*?)```)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(raw.begin(), raw.end(), m, fence)) return std::nullopt;
  return parse_object(
      raw.substr(static_cast<std::size_t>(m.position(1)), static_cast<std::size_t>(m.length(1))));
}

std::optional<AnswerMap> from_balanced(std::string_view raw) {
  for (auto start = raw.find('{'); start != std::string_view::npos;
       start = raw.find('{', start + 1)) {
    const auto candidate = extract_balanced_object(raw, start);
    if (candidate.empty()) continue;
    if (auto parsed = parse_object(candidate)) return parsed;
  }
  return std::nullopt;
}

std::string regex_escape(const std::string& text) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  return std::regex_replace(text, special, R"(\$&)");
}

std::optional<AnswerMap> from_key_patterns(std::string_view raw,
                                           std::span<const std::string> keys) {
  AnswerMap out;
  const std::string text(raw);
  for (const auto& key : keys) {
    const std::regex pattern("\"" + regex_escape(key) + R"re("\s*:\s*"((?:[^"\\]|\\.)*)")re");
    std::smatch m;
    if (!std::regex_search(text, m, pattern)) continue;
    const auto decoded = json::parse("\"" + m[1].str() + "\"", nullptr, false);
    out[key] = decoded.is_string() ? decoded.get<std::string>() : m[1].str();
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::string extract_balanced_object(std::string_view text, std::size_t from) {
  const auto start = text.find('{', from);
  if (start == std::string_view::npos) return {};
  int depth = 0;
  bool in_string = false;
  bool escape = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escape) {
        escape = false;
      } else if (c == '\\') {
        escape = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(text.substr(start, i - start + 1));
    }
  }
  return {};
}

ParseOutcome parse_response(std::string_view raw, std::span<const std::string> expected_keys,
                            ParseOptions options) {
  ParseOutcome outcome;
  if (is_blank(raw)) {
    outcome.status = ResponseStatus::Empty;
    return outcome;
  }

  auto attempt = [&](int step, auto&& parser) {
    if (outcome.parsed || step < options.first_step) return;
    if (auto parsed = parser()) {
      outcome.parsed = std::move(parsed);
      outcome.step = step;
    }
  };
  attempt(1, [&] { return parse_object(raw); });
  attempt(2, [&] { return from_fence(raw); });
  attempt(3, [&] { return from_balanced(raw); });
  attempt(4, [&] { return from_key_patterns(raw, expected_keys); });

  outcome.status = outcome.parsed ? ResponseStatus::Ok : ResponseStatus::BadParsing;
  return outcome;
}

}  // namespace lingobf
