#pragma once

// Problem annotation grammar.
//
//   $$$text$$$   name tag; `text` is the replacement already written in
//                (e.g. "Language X") and is rendered as-is
//   &&&text&&&   removed cultural context; rendered as a single space
//   @@@text@@@   Problemese data; rendered through the obfuscation map
//
// Tags do not nest. A literal marker triple is written with a backslash
// escape (`\@@@`). Parsing is lossless: serialize(parse(s)) == s.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lingobf/obfuscation.hpp"
#include "lingobf/ruleset.hpp"

namespace lingobf {

enum class SegmentKind { Plain, Problemese, NameTag, RemovedContext };

struct Segment {
  SegmentKind kind;
  std::string source;  // bytes between the markers, escapes intact
  std::size_t offset;  // byte offset of the segment (opening marker) in the input

  // Source with `\` escapes removed.
  std::string text() const;

  bool operator==(const Segment&) const = default;
};

struct AnnotatedDocument {
  std::vector<Segment> segments;

  std::string serialize() const;
  bool has_problemese() const;

  bool operator==(const AnnotatedDocument&) const = default;
};

// Throws ParseError with the byte offset of an unbalanced opener or of a
// marker nested inside another tag.
AnnotatedDocument parse(std::string_view text);

std::string render(const AnnotatedDocument& doc);
std::string render(const AnnotatedDocument& doc, const PermutationMap& map,
                   const GraphemeMatcher& matcher);
std::string render(const AnnotatedDocument& doc, const PermutationMap& map,
                   const Ruleset& ruleset, ObfuscationOptions options = {});

struct CoverageGap {
  std::string text;
  std::size_t span_index;     // index among the document's Problemese spans
  std::size_t offset;         // bytes into the span text
  std::size_t source_offset;  // bytes into the serialized document

  bool operator==(const CoverageGap&) const = default;
};

std::vector<CoverageGap> coverage_report(const AnnotatedDocument& doc,
                                         const GraphemeMatcher& matcher);
std::vector<CoverageGap> coverage_report(const AnnotatedDocument& doc, const Ruleset& ruleset,
                                         ObfuscationOptions options = {});

}  // namespace lingobf
