#pragma once

// Thin wrappers over ICU for the handful of Unicode operations the toolkit
// needs. All text is UTF-8 in std::string.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lingobf::unicode {

// Canonical composed form (NFC). Invalid UTF-8 sequences are replaced by
// U+FFFD.
std::string nfc(std::string_view text);
bool is_nfc(std::string_view text);

// One decoded codepoint and the byte range it occupies in the source. An
// invalid byte decodes as a single-byte span with `valid == false`.
struct CodepointSpan {
  char32_t cp;
  std::size_t offset;
  std::size_t length;
  bool valid;
};

std::vector<CodepointSpan> decode(std::string_view text);
std::string encode(char32_t cp);
std::size_t codepoint_count(std::string_view text);

// Simple (1:1) case folding, so folded and source codepoints stay aligned.
char32_t fold(char32_t cp);
std::string fold(std::string_view text);
char32_t to_upper(char32_t cp);
bool is_upper(char32_t cp);  // uppercase or titlecase letter
bool has_case(char32_t cp);  // upper(cp) != lower(cp)

bool is_whitespace(char32_t cp);
bool is_digit(char32_t cp);
bool is_ascii_punct(char32_t cp);

// Trims Unicode whitespace at both ends and collapses interior runs to a
// single U+0020.
std::string collapse_whitespace(std::string_view text);

}  // namespace lingobf::unicode
