#include "lingobf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lingobf/error.hpp"
#include "lingobf/unicode.hpp"

namespace lingobf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kCorpusSchema = 1;

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

// Drops trailing line breaks and leading blank lines from a section body.
std::string section_body(const std::vector<std::string>& lines) {
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  std::size_t last = lines.size();
  while (last > first && trim(lines[last - 1]).empty()) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i > first) out += '\n';
    out += lines[i];
  }
  return out;
}

json read_json_file(const fs::path& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
}

void check_schema(const json& doc, const std::string& file) {
  if (!doc.is_object()) throw ValidationError(file + ": expected a JSON object");
  if (doc.contains("schema_version") && doc["schema_version"] != kCorpusSchema) {
    throw ValidationError(file + ": unsupported schema_version " + doc["schema_version"].dump());
  }
}

}  // namespace

std::string_view to_string(Difficulty level) {
  switch (level) {
    case Difficulty::Breakthrough:
      return "Breakthrough";
    case Difficulty::Foundation:
      return "Foundation";
    case Difficulty::Intermediate:
      return "Intermediate";
    case Difficulty::Advanced:
      return "Advanced";
    case Difficulty::Round2:
      return "Round2";
  }
  return "?";
}

Difficulty difficulty_from_string(std::string_view name) {
  std::string compact;
  for (const char c : name) {
    if (c != ' ' && c != '_' && c != '-') compact += static_cast<char>(std::tolower(c));
  }
  for (const auto level : kDifficulties) {
    std::string candidate;
    for (const char c : to_string(level)) candidate += static_cast<char>(std::tolower(c));
    if (candidate == compact) return level;
  }
  throw ValidationError("unknown difficulty level `" + std::string(name) + "`");
}

Difficulty lowest_difficulty(std::span<const Difficulty> levels) {
  if (levels.empty()) throw ValidationError("no difficulty level given");
  return *std::min_element(levels.begin(), levels.end());
}

std::size_t Problem::pair_count() const {
  std::size_t n = 0;
  for (const auto& q : questions) n += q.subquestions.size();
  return n;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ProblemText parse_problem_text(std::string_view text) {
  enum class Section { None, Preamble, Context, Body, Sub };

  ProblemText out;
  Section section = Section::None;
  std::vector<std::string> lines;
  std::size_t section_offset = 0;
  std::string sub_key;
  bool saw_preamble = false;
  bool saw_context = false;

  auto parse_section = [&](const std::string& body) {
    try {
      return parse(body);
    } catch (const ParseError& e) {
      // Re-anchor the offset to the whole file.
      throw ParseError(std::string(e.what()).substr(0, std::string(e.what()).rfind(" at offset")),
                       section_offset + e.offset());
    }
  };

  auto close_section = [&]() {
    const auto body = section_body(lines);
    switch (section) {
      case Section::None:
        if (!body.empty()) throw ParseError("text before the first %% directive", 0);
        break;
      case Section::Preamble:
        out.preamble = parse_section(body);
        break;
      case Section::Context:
        out.context = parse_section(body);
        break;
      case Section::Body:
        out.questions.back().body = parse_section(body);
        break;
      case Section::Sub:
        out.questions.back().subquestions.push_back({sub_key, parse_section(body), {}, {}});
        break;
    }
    lines.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t line_offset = pos;
    pos = end + 1;

    if (line.rfind("%%", 0) != 0) {
      lines.push_back(std::move(line));
      if (end == text.size()) break;
      continue;
    }
    const auto directive = trim(std::string_view(line).substr(2));
    if (!directive.empty() && directive.front() == '#') {
      if (end == text.size()) break;
      continue;
    }

    close_section();
    section_offset = pos;
    std::istringstream words(directive);
    std::string name;
    words >> name;
    if (name == "preamble") {
      if (saw_preamble) throw ParseError("duplicate %% preamble", line_offset);
      saw_preamble = true;
      section = Section::Preamble;
    } else if (name == "context") {
      if (saw_context) throw ParseError("duplicate %% context", line_offset);
      saw_context = true;
      section = Section::Context;
    } else if (name == "question") {
      out.questions.emplace_back();
      section = Section::Body;
    } else if (name == "sub") {
      if (out.questions.empty()) throw ParseError("%% sub before any %% question", line_offset);
      sub_key.clear();
      words >> sub_key;
      if (sub_key.empty()) throw ParseError("%% sub without a key", line_offset);
      section = Section::Sub;
    } else {
      throw ParseError("unknown directive %% " + name, line_offset);
    }
    if (end == text.size()) break;
  }
  close_section();
  return out;
}

std::vector<std::string> Problem::problemese_spans() const {
  std::vector<std::string> out;
  auto add = [&](const AnnotatedDocument& doc) {
    for (const auto& s : doc.segments) {
      if (s.kind == SegmentKind::Problemese) out.push_back(s.text());
    }
  };
  add(preamble);
  add(context);
  for (const auto& q : questions) {
    add(q.body);
    for (const auto& s : q.subquestions) {
      add(s.text);
      add(parse(s.answer));
      for (const auto& alt : s.alternates) add(parse(alt));
    }
  }
  return out;
}

Problem load_problem(const fs::path& dir, ObfuscationOptions options) {
  std::vector<std::string> reasons;
  Problem problem;
  problem.id = dir.filename().string();

  for (const char* name : {"problem.txt", "answers.json", "ruleset.json", "meta.json"}) {
    if (!fs::exists(dir / name)) reasons.push_back(std::string("missing ") + name);
  }
  if (!reasons.empty()) throw ValidationError("incomplete problem directory", reasons);

  auto attempt = [&](auto&& step) {
    try {
      step();
      return true;
    } catch (const ValidationError& e) {
      reasons.push_back(e.what());
      for (const auto& d : e.details()) reasons.push_back("  " + d);
    } catch (const Error& e) {
      reasons.push_back(e.what());
    } catch (const json::exception& e) {
      reasons.push_back(e.what());
    }
    return false;
  };

  attempt([&] {
    const auto meta = read_json_file(dir / "meta.json");
    check_schema(meta, "meta.json");
    if (meta.contains("id")) problem.id = unicode::nfc(meta.at("id").get<std::string>());
    const auto& level = meta.at("difficulty");
    std::vector<Difficulty> levels;
    if (level.is_array()) {
      for (const auto& l : level) levels.push_back(difficulty_from_string(l.get<std::string>()));
    } else {
      levels.push_back(difficulty_from_string(level.get<std::string>()));
    }
    problem.difficulty = lowest_difficulty(levels);
    const auto& language = meta.at("language");
    problem.language_meta.name = unicode::nfc(language.at("name").get<std::string>());
    problem.language_meta.speakers = language.at("speakers").get<std::uint64_t>();
    if (problem.language_meta.speakers == 0) {
      throw ValidationError("meta.json: speakers must be positive");
    }
  });

  const bool have_text = attempt([&] {
    auto text = parse_problem_text(unicode::nfc(read_text_file(dir / "problem.txt")));
    problem.preamble = std::move(text.preamble);
    problem.context = std::move(text.context);
    problem.questions = std::move(text.questions);
    if (problem.questions.empty()) throw ValidationError("problem.txt: no questions");
    for (std::size_t j = 0; j < problem.questions.size(); ++j) {
      const auto& subs = problem.questions[j].subquestions;
      if (subs.empty()) {
        throw ValidationError("problem.txt: question " + std::to_string(j + 1) +
                              " has no sub-questions");
      }
      std::set<std::string> keys;
      for (const auto& s : subs) {
        if (!keys.insert(s.key).second) {
          throw ValidationError("problem.txt: duplicate key " + s.key + " in question " +
                                std::to_string(j + 1));
        }
      }
    }
  });

  if (have_text) {
    attempt([&] {
      const auto doc = read_json_file(dir / "answers.json");
      check_schema(doc, "answers.json");
      const auto& answers = doc.at("answers");
      if (!answers.is_array() || answers.size() != problem.questions.size()) {
        throw ValidationError("answers.json: expected " +
                              std::to_string(problem.questions.size()) + " answer objects");
      }
      std::vector<std::string> problems;
      for (std::size_t j = 0; j < problem.questions.size(); ++j) {
        auto& subs = problem.questions[j].subquestions;
        const auto& given = answers[j];
        for (auto& sub : subs) {
          if (!given.contains(sub.key)) {
            problems.push_back("question " + std::to_string(j + 1) + ": no answer for " + sub.key);
            continue;
          }
          const auto& entry = given[sub.key];
          if (entry.is_string()) {
            sub.answer = unicode::nfc(entry.get<std::string>());
          } else {
            sub.answer = unicode::nfc(entry.at("answer").get<std::string>());
            for (const auto& alt : entry.value("alternates", json::array())) {
              sub.alternates.push_back(unicode::nfc(alt.get<std::string>()));
            }
          }
          parse(sub.answer);
          for (const auto& alt : sub.alternates) parse(alt);
        }
        for (const auto& [key, value] : given.items()) {
          const bool known = std::any_of(subs.begin(), subs.end(),
                                         [&](const Subquestion& s) { return s.key == key; });
          if (!known) {
            problems.push_back("question " + std::to_string(j + 1) + ": answer for unknown key " +
                               key);
          }
        }
      }
      if (!problems.empty()) throw ValidationError("answers.json does not match problem.txt", problems);
    });
  }

  const bool have_ruleset = attempt([&] {
    problem.ruleset = load_ruleset((dir / "ruleset.json").string());
    require_valid(problem.ruleset);
  });

  if (have_text && have_ruleset && reasons.empty()) {
    attempt([&] {
      const GraphemeMatcher matcher(problem.ruleset, options);
      std::vector<std::string> gaps;
      auto check = [&](const AnnotatedDocument& doc, const std::string& where) {
        for (const auto& gap : coverage_report(doc, matcher)) {
          gaps.push_back(where + ": uncovered \"" + gap.text + "\" at offset " +
                         std::to_string(gap.offset) + " of span " +
                         std::to_string(gap.span_index));
        }
      };
      check(problem.preamble, "preamble");
      check(problem.context, "context");
      for (std::size_t j = 0; j < problem.questions.size(); ++j) {
        const auto& q = problem.questions[j];
        const auto where = "question " + std::to_string(j + 1);
        check(q.body, where);
        for (const auto& s : q.subquestions) {
          check(s.text, where + " sub " + s.key);
          check(parse(s.answer), where + " answer " + s.key);
          for (const auto& alt : s.alternates) check(parse(alt), where + " alternate " + s.key);
        }
      }
      if (!gaps.empty()) throw ValidationError("Problemese text not covered by ruleset", gaps);
    });

    attempt([&] {
      const auto needle = unicode::fold(problem.language_meta.name);
      if (needle.empty()) return;
      std::vector<std::string> leaks;
      auto check = [&](const std::string& rendered, const std::string& where) {
        if (unicode::fold(rendered).find(needle) != std::string::npos) leaks.push_back(where);
      };
      check(render(problem.preamble), "preamble");
      check(render(problem.context), "context");
      for (std::size_t j = 0; j < problem.questions.size(); ++j) {
        const auto& q = problem.questions[j];
        check(render(q.body), "question " + std::to_string(j + 1));
        for (const auto& s : q.subquestions) {
          check(render(s.text), "question " + std::to_string(j + 1) + " sub " + s.key);
        }
      }
      if (!leaks.empty()) throw ValidationError("language name appears in rendered text", leaks);
    });
  }

  if (!reasons.empty()) throw ValidationError("problem " + problem.id + " failed to load", reasons);
  return problem;
}

Corpus load_corpus(const fs::path& dir, ObfuscationOptions options) {
  Corpus corpus;
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir.string());

  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) entries.push_back(entry.path());
  }
  std::sort(entries.begin(), entries.end());
  if (entries.empty()) corpus.report.warnings.push_back("corpus directory contains no problems");

  std::set<std::string> ids;
  for (const auto& path : entries) {
    try {
      auto problem = load_problem(path, options);
      if (!ids.insert(problem.id).second) {
        corpus.report.failures.push_back({problem.id, {"duplicate problem id"}});
        continue;
      }
      corpus.problems.push_back(std::move(problem));
    } catch (const ValidationError& e) {
      corpus.report.failures.push_back({path.filename().string(), e.details()});
    } catch (const Error& e) {
      corpus.report.failures.push_back({path.filename().string(), {e.what()}});
    }
  }
  std::sort(corpus.problems.begin(), corpus.problems.end(),
            [](const Problem& a, const Problem& b) { return a.id < b.id; });
  return corpus;
}

}  // namespace lingobf
