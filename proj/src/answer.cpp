#include "lingobf/answer.hpp"

#include <algorithm>

#include "lingobf/unicode.hpp"

namespace lingobf {

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::Digit:
      return "Digit";
    case AnswerType::SingleChar:
      return "SingleChar";
    case AnswerType::YesNo:
      return "YN";
    case AnswerType::Other:
      return "Other";
  }
  return "?";
}

AnswerType answer_type(std::string_view gold) {
  const auto trimmed = unicode::collapse_whitespace(unicode::nfc(gold));
  const auto spans = unicode::decode(trimmed);
  if (!spans.empty() && std::all_of(spans.begin(), spans.end(), [](const auto& s) {
        return s.valid && unicode::is_digit(s.cp);
      })) {
    return AnswerType::Digit;
  }
  if (spans.size() == 1) return AnswerType::SingleChar;
  const auto folded = unicode::fold(trimmed);
  if (folded == "yes" || folded == "no" || folded == "y" || folded == "n") {
    return AnswerType::YesNo;
  }
  return AnswerType::Other;
}

std::string normalize_answer(std::string_view text, MatchOptions options) {
  auto out = unicode::collapse_whitespace(unicode::nfc(text));
  return options.case_sensitive ? out : unicode::fold(out);
}

int exact_match(std::string_view prediction, std::string_view gold,
                std::span<const std::string> alternates, MatchOptions options) {
  const auto pred = normalize_answer(prediction, options);
  if (pred == normalize_answer(gold, options)) return 1;
  for (const auto& alt : alternates) {
    if (pred == normalize_answer(alt, options)) return 1;
  }
  return 0;
}

}  // namespace lingobf
