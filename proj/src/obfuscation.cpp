#include "lingobf/obfuscation.hpp"

#include <algorithm>
#include <map>

#include "lingobf/annotation.hpp"
#include "lingobf/error.hpp"
#include "lingobf/unicode.hpp"

namespace lingobf {

std::string SegmentedText::joined() const {
  std::string out;
  for (const auto& unit : units) out += unit.text;
  return out;
}

std::size_t SegmentedText::grapheme_count() const {
  return static_cast<std::size_t>(std::count_if(
      units.begin(), units.end(), [](const Unit& u) { return u.kind == UnitKind::Grapheme; }));
}

bool is_passthrough_char(char32_t cp) {
  return unicode::is_whitespace(cp) || unicode::is_ascii_punct(cp) || unicode::is_digit(cp);
}

std::vector<UncoveredRun> uncovered_runs(const SegmentedText& segmented) {
  std::vector<UncoveredRun> runs;
  bool extending = false;
  for (const auto& unit : segmented.units) {
    bool gap = false;
    if (unit.kind == UnitKind::Passthrough) {
      const auto spans = unicode::decode(unit.text);
      gap = spans.size() != 1 || !spans.front().valid || !is_passthrough_char(spans.front().cp);
    }
    if (!gap) {
      extending = false;
      continue;
    }
    if (extending) {
      runs.back().text += unit.text;
    } else {
      runs.push_back({unit.text, unit.offset});
      extending = true;
    }
  }
  return runs;
}

GraphemeMatcher::GraphemeMatcher(Ruleset ruleset, ObfuscationOptions options)
    : ruleset_(std::move(ruleset)), ruleset_id_(ruleset_.id()), options_(options) {
  require_valid(ruleset_);
  nodes_.emplace_back();

  std::map<std::string, std::string> folded_inventory;
  std::vector<std::string> collisions;
  for (const auto& g : ruleset_.inventory()) {
    const auto key = options_.case_aware ? unicode::fold(g) : g;
    const auto [it, inserted] = folded_inventory.emplace(key, g);
    if (!inserted) collisions.push_back(it->second + " and " + g + " coincide under case folding");
  }
  if (!collisions.empty()) {
    throw ValidationError("ruleset is ambiguous with case-aware matching", collisions);
  }

  for (const auto& g : ruleset_.inventory()) {
    entries_.push_back(g);
    insert(g, static_cast<int>(entries_.size() - 1), false);
  }
  for (const auto& f : ruleset_.fixed) {
    entries_.push_back(f);
    insert(f, static_cast<int>(entries_.size() - 1), true);
  }
}

std::uint32_t GraphemeMatcher::child(std::uint32_t node, char32_t cp) const {
  const auto& next = nodes_[node].next;
  const auto it = std::lower_bound(next.begin(), next.end(), cp,
                                   [](const auto& edge, char32_t c) { return edge.first < c; });
  return it != next.end() && it->first == cp ? it->second : 0;
}

void GraphemeMatcher::insert(std::string_view text, int entry, bool fixed) {
  std::uint32_t node = 0;
  for (const auto& span : unicode::decode(text)) {
    const char32_t cp = options_.case_aware ? unicode::fold(span.cp) : span.cp;
    std::uint32_t next = child(node, cp);
    if (next == 0) {
      next = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
      auto& edges = nodes_[node].next;
      const auto pos = std::lower_bound(edges.begin(), edges.end(), cp,
                                        [](const auto& e, char32_t c) { return e.first < c; });
      edges.insert(pos, {cp, next});
    }
    node = next;
  }
  auto& slot = fixed ? nodes_[node].fixed : nodes_[node].grapheme;
  if (slot < 0) slot = entry;
}

SegmentedText GraphemeMatcher::segment(std::string_view text) const {
  SegmentedText out;
  const auto spans = unicode::decode(text);
  std::size_t i = 0;
  while (i < spans.size()) {
    std::size_t best_end = 0;
    int best_entry = -1;
    bool best_fixed = false;

    std::uint32_t node = 0;
    for (std::size_t j = i; j < spans.size(); ++j) {
      if (!spans[j].valid) break;
      const char32_t cp = options_.case_aware ? unicode::fold(spans[j].cp) : spans[j].cp;
      node = child(node, cp);
      if (node == 0) break;
      const auto& n = nodes_[node];
      if (n.fixed >= 0) {
        best_end = j + 1;
        best_entry = n.fixed;
        best_fixed = true;
      } else if (n.grapheme >= 0) {
        best_end = j + 1;
        best_entry = n.grapheme;
        best_fixed = false;
      }
    }

    const std::size_t begin = spans[i].offset;
    if (best_entry >= 0) {
      const std::size_t end = spans[best_end - 1].offset + spans[best_end - 1].length;
      out.units.push_back({best_fixed ? UnitKind::Fixed : UnitKind::Grapheme,
                           std::string(text.substr(begin, end - begin)),
                           entries_[static_cast<std::size_t>(best_entry)], begin});
      i = best_end;
    } else {
      out.units.push_back(
          {UnitKind::Passthrough, std::string(text.substr(begin, spans[i].length)), "", begin});
      ++i;
    }
  }
  return out;
}

void GraphemeMatcher::check_compatible(const PermutationMap& map) const {
  if (!map.ruleset_id().empty() && map.ruleset_id() != ruleset_id_) {
    throw MapMismatchError("map was built for ruleset " + map.ruleset_id() + ", not " +
                           ruleset_id_);
  }
  const auto inventory = ruleset_.inventory();
  if (map.pairs().size() != inventory.size()) {
    throw MapMismatchError("map covers " + std::to_string(map.pairs().size()) +
                           " graphemes, ruleset inventory has " +
                           std::to_string(inventory.size()));
  }
  for (const auto& g : inventory) {
    if (!map.pairs().contains(g)) throw MapMismatchError("map does not cover grapheme " + g);
  }
}

namespace {

std::string apply_casing(std::string_view source, const std::string& replacement) {
  const auto src = unicode::decode(source);
  if (src.empty() || !src.front().valid || !unicode::is_upper(src.front().cp)) {
    return replacement;
  }
  std::size_t cased = 0;
  bool all_upper = true;
  for (const auto& s : src) {
    if (!s.valid || !unicode::has_case(s.cp)) continue;
    ++cased;
    all_upper = all_upper && unicode::is_upper(s.cp);
  }
  std::string out;
  bool first = true;
  for (const auto& s : unicode::decode(replacement)) {
    if (s.valid && (first || (all_upper && cased >= 2))) {
      out += unicode::encode(unicode::to_upper(s.cp));
    } else {
      out += replacement.substr(s.offset, s.length);
    }
    first = false;
  }
  return out;
}

}  // namespace

std::string GraphemeMatcher::apply(const PermutationMap& map, std::string_view text) const {
  check_compatible(map);
  std::string out;
  out.reserve(text.size());
  for (const auto& unit : segment(text).units) {
    if (unit.kind != UnitKind::Grapheme) {
      out += unit.text;
      continue;
    }
    const auto& image = map(unit.grapheme);
    if (image == unit.grapheme) {
      out += unit.text;
    } else {
      out += options_.case_aware ? apply_casing(unit.text, image) : image;
    }
  }
  return out;
}

bool GraphemeMatcher::is_stable(const PermutationMap& map, std::string_view text) const {
  const auto before = segment(text);
  const auto after = segment(apply(map, text));
  if (before.units.size() != after.units.size()) return false;
  for (std::size_t i = 0; i < before.units.size(); ++i) {
    const auto& b = before.units[i];
    const auto& a = after.units[i];
    if (a.kind != b.kind) return false;
    if (b.kind == UnitKind::Grapheme && a.grapheme != map(b.grapheme)) return false;
  }
  return true;
}

SegmentedText segment(std::string_view text, const Ruleset& ruleset, ObfuscationOptions options) {
  return GraphemeMatcher(ruleset, options).segment(text);
}

std::string apply(const PermutationMap& map, std::string_view text, const Ruleset& ruleset,
                  ObfuscationOptions options) {
  return GraphemeMatcher(ruleset, options).apply(map, text);
}

RenderedVariant obfuscate_variant(std::span<const AnnotatedDocument> documents,
                                  std::span<const KeyedText> answers, const PermutationMap& map,
                                  const GraphemeMatcher& matcher) {
  matcher.check_compatible(map);

  std::vector<AnnotatedDocument> parsed_answers;
  parsed_answers.reserve(answers.size());
  for (const auto& answer : answers) parsed_answers.push_back(parse(answer.text));

  std::vector<std::string> gaps;
  auto collect = [&](const AnnotatedDocument& doc, const std::string& where) {
    for (const auto& gap : coverage_report(doc, matcher)) {
      gaps.push_back(where + ": \"" + gap.text + "\" at offset " +
                     std::to_string(gap.source_offset));
    }
  };
  for (std::size_t d = 0; d < documents.size(); ++d) {
    collect(documents[d], "document " + std::to_string(d));
  }
  for (std::size_t a = 0; a < answers.size(); ++a) {
    collect(parsed_answers[a], "answer " + answers[a].key);
  }
  if (!gaps.empty()) {
    throw CoverageError("Problemese text not covered by the ruleset", std::move(gaps));
  }

  RenderedVariant out;
  for (const auto& doc : documents) out.documents.push_back(render(doc, map, matcher));
  for (std::size_t a = 0; a < answers.size(); ++a) {
    out.answers.push_back({answers[a].key, render(parsed_answers[a], map, matcher)});
  }
  return out;
}

}  // namespace lingobf
