#pragma once

#include <span>
#include <string>
#include <string_view>

namespace lingobf {

enum class AnswerType { Digit, SingleChar, YesNo, Other };

std::string_view to_string(AnswerType type);

// Precedence is Digit, SingleChar, YesNo, Other, applied to the trimmed gold
// string: "7" is Digit, "y" is SingleChar, "Yes" is YesNo.
AnswerType answer_type(std::string_view gold);

struct MatchOptions {
  bool case_sensitive = true;
};

// Normalizes both sides (NFC, trim, collapse whitespace runs) and compares
// against the gold answer and each alternate. Returns 0 or 1.
int exact_match(std::string_view prediction, std::string_view gold,
                std::span<const std::string> alternates = {}, MatchOptions options = {});

std::string normalize_answer(std::string_view text, MatchOptions options = {});

}  // namespace lingobf
