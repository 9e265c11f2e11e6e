#include "lingobf/annotation.hpp"

#include "lingobf/error.hpp"

namespace lingobf {
namespace {

constexpr std::size_t kMarkerLength = 3;

// Returns the marker character when a triple starts at pos, 0 otherwise.
char marker_at(std::string_view text, std::size_t pos) {
  if (pos + kMarkerLength > text.size()) return 0;
  const char c = text[pos];
  if (c != '$' && c != '&' && c != '@') return 0;
  return text[pos + 1] == c && text[pos + 2] == c ? c : 0;
}

bool escaped_marker_at(std::string_view text, std::size_t pos) {
  return text[pos] == '\\' && marker_at(text, pos + 1) != 0;
}

SegmentKind kind_for(char marker) {
  switch (marker) {
    case '$':
      return SegmentKind::NameTag;
    case '&':
      return SegmentKind::RemovedContext;
    default:
      return SegmentKind::Problemese;
  }
}

char marker_for(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::NameTag:
      return '$';
    case SegmentKind::RemovedContext:
      return '&';
    case SegmentKind::Problemese:
      return '@';
    case SegmentKind::Plain:
      break;
  }
  return 0;
}

}  // namespace

std::string Segment::text() const {
  std::string out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (escaped_marker_at(source, i)) continue;
    out += source[i];
  }
  return out;
}

std::string AnnotatedDocument::serialize() const {
  std::string out;
  for (const auto& segment : segments) {
    if (segment.kind == SegmentKind::Plain) {
      out += segment.source;
    } else {
      const std::string marker(kMarkerLength, marker_for(segment.kind));
      out += marker + segment.source + marker;
    }
  }
  return out;
}

bool AnnotatedDocument::has_problemese() const {
  for (const auto& segment : segments) {
    if (segment.kind == SegmentKind::Problemese) return true;
  }
  return false;
}

AnnotatedDocument parse(std::string_view text) {
  AnnotatedDocument doc;
  std::size_t plain_start = 0;
  std::size_t pos = 0;

  auto flush_plain = [&](std::size_t end) {
    if (end > plain_start) {
      doc.segments.push_back(
          {SegmentKind::Plain, std::string(text.substr(plain_start, end - plain_start)),
           plain_start});
    }
  };

  while (pos < text.size()) {
    if (escaped_marker_at(text, pos)) {
      pos += 1 + kMarkerLength;
      continue;
    }
    const char opener = marker_at(text, pos);
    if (opener == 0) {
      ++pos;
      continue;
    }

    flush_plain(pos);
    const std::size_t content_start = pos + kMarkerLength;
    std::size_t q = content_start;
    bool closed = false;
    while (q < text.size()) {
      if (escaped_marker_at(text, q)) {
        q += 1 + kMarkerLength;
        continue;
      }
      const char m = marker_at(text, q);
      if (m == opener) {
        closed = true;
        break;
      }
      if (m != 0) {
        throw ParseError(std::string("marker ") + std::string(kMarkerLength, m) +
                             " nested inside " + std::string(kMarkerLength, opener) + " tag",
                         q);
      }
      ++q;
    }
    if (!closed) {
      throw ParseError("unbalanced marker " + std::string(kMarkerLength, opener), pos);
    }
    doc.segments.push_back(
        {kind_for(opener), std::string(text.substr(content_start, q - content_start)), pos});
    pos = q + kMarkerLength;
    plain_start = pos;
  }
  flush_plain(text.size());
  return doc;
}

namespace {

template <typename SpanRenderer>
std::string render_with(const AnnotatedDocument& doc, SpanRenderer&& render_span) {
  std::string out;
  for (const auto& segment : doc.segments) {
    switch (segment.kind) {
      case SegmentKind::Plain:
      case SegmentKind::NameTag:
        out += segment.text();
        break;
      case SegmentKind::RemovedContext:
        out += ' ';
        break;
      case SegmentKind::Problemese:
        out += render_span(segment.text());
        break;
    }
  }
  return out;
}

}  // namespace

std::string render(const AnnotatedDocument& doc) {
  return render_with(doc, [](std::string text) { return text; });
}

std::string render(const AnnotatedDocument& doc, const PermutationMap& map,
                   const GraphemeMatcher& matcher) {
  matcher.check_compatible(map);
  return render_with(doc, [&](const std::string& text) { return matcher.apply(map, text); });
}

std::string render(const AnnotatedDocument& doc, const PermutationMap& map,
                   const Ruleset& ruleset, ObfuscationOptions options) {
  return render(doc, map, GraphemeMatcher(ruleset, options));
}

std::vector<CoverageGap> coverage_report(const AnnotatedDocument& doc,
                                         const GraphemeMatcher& matcher) {
  std::vector<CoverageGap> gaps;
  std::size_t span_index = 0;
  for (const auto& segment : doc.segments) {
    if (segment.kind != SegmentKind::Problemese) continue;
    for (const auto& run : uncovered_runs(matcher.segment(segment.text()))) {
      gaps.push_back({run.text, span_index, run.offset, segment.offset + kMarkerLength + run.offset});
    }
    ++span_index;
  }
  return gaps;
}

std::vector<CoverageGap> coverage_report(const AnnotatedDocument& doc, const Ruleset& ruleset,
                                         ObfuscationOptions options) {
  return coverage_report(doc, GraphemeMatcher(ruleset, options));
}

}  // namespace lingobf
