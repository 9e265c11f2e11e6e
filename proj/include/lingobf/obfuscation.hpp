#pragma once

// Greedy grapheme segmentation and map application.
//
// Segmentation scans left to right and at each position consumes the longest
// fixed string or inventory grapheme that matches there; a fixed string wins
// an exact-length tie. Where nothing matches, one codepoint is emitted as
// passthrough. Whitespace, ASCII punctuation and digits are expected
// passthrough; any other unmatched codepoint is a coverage gap.
//
// With case-aware matching (the default) comparison runs on simple case
// folding and a replacement inherits the casing of the unit it replaces:
// initial capital, or all capitals for multi-codepoint units.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lingobf/ruleset.hpp"

namespace lingobf {

struct ObfuscationOptions {
  bool case_aware = true;
};

enum class UnitKind { Grapheme, Fixed, Passthrough };

struct Unit {
  UnitKind kind;
  std::string text;      // source bytes
  std::string grapheme;  // ruleset spelling for Grapheme/Fixed units, empty otherwise
  std::size_t offset;    // byte offset in the segmented string

  bool operator==(const Unit&) const = default;
};

struct SegmentedText {
  std::vector<Unit> units;

  std::string joined() const;
  std::size_t grapheme_count() const;
};

struct UncoveredRun {
  std::string text;
  std::size_t offset;  // bytes, relative to the segmented string

  bool operator==(const UncoveredRun&) const = default;
};

bool is_passthrough_char(char32_t cp);

// Maximal runs of passthrough units that are not passthrough-class
// characters.
std::vector<UncoveredRun> uncovered_runs(const SegmentedText& segmented);

// Longest-match automaton over the fixed strings and inventory of one
// ruleset. Immutable after construction and safe to share across threads.
class GraphemeMatcher {
 public:
  // Throws ValidationError for an invalid ruleset, or when two inventory
  // graphemes collide under case folding with case-aware matching on.
  explicit GraphemeMatcher(Ruleset ruleset, ObfuscationOptions options = {});

  SegmentedText segment(std::string_view text) const;

  // Throws MapMismatchError when the map was not built for this ruleset.
  std::string apply(const PermutationMap& map, std::string_view text) const;

  void check_compatible(const PermutationMap& map) const;

  // True when segment(apply(map, text)) is unit-for-unit the image of
  // segment(text). Greedy matching can fail this: with fixed "sh", a map
  // sending n -> s and k -> h turns "nk" into the digraph "sh", which the
  // inverse map can no longer undo.
  bool is_stable(const PermutationMap& map, std::string_view text) const;

  const Ruleset& ruleset() const noexcept { return ruleset_; }
  const ObfuscationOptions& options() const noexcept { return options_; }

 private:
  struct Node {
    std::vector<std::pair<char32_t, std::uint32_t>> next;  // sorted by codepoint
    int grapheme = -1;  // index into entries_
    int fixed = -1;
  };

  std::uint32_t child(std::uint32_t node, char32_t cp) const;
  void insert(std::string_view text, int entry, bool fixed);

  Ruleset ruleset_;
  std::string ruleset_id_;
  ObfuscationOptions options_;
  std::vector<std::string> entries_;
  std::vector<Node> nodes_;
};

SegmentedText segment(std::string_view text, const Ruleset& ruleset,
                      ObfuscationOptions options = {});

std::string apply(const PermutationMap& map, std::string_view text, const Ruleset& ruleset,
                  ObfuscationOptions options = {});

struct AnnotatedDocument;

struct KeyedText {
  std::string key;
  std::string text;

  bool operator==(const KeyedText&) const = default;
};

struct RenderedVariant {
  std::vector<std::string> documents;
  std::vector<KeyedText> answers;
};

// Renders every document and answer with the same map. Answers are parsed
// with the annotation grammar, so only their Problemese spans change. Throws
// CoverageError, listing every gap, before rendering anything.
RenderedVariant obfuscate_variant(std::span<const AnnotatedDocument> documents,
                                  std::span<const KeyedText> answers, const PermutationMap& map,
                                  const GraphemeMatcher& matcher);

}  // namespace lingobf
