#include "lingobf/dataset.hpp"

#include <sstream>

#include "lingobf/answer.hpp"
#include "lingobf/digest.hpp"
#include "lingobf/error.hpp"
#include "lingobf/rng.hpp"

namespace lingobf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDatasetSchema = 1;

std::string alternate_key(const std::string& key, std::size_t index) {
  return key + "#" + std::to_string(index);
}

}  // namespace

std::string make_variant_id(const std::string& problem_id, std::size_t p) {
  return problem_id + "/p" + std::to_string(p);
}

std::string ProblemVariant::variant_id() const { return make_variant_id(problem_id, p); }

const ProblemVariant* Dataset::find(const std::string& variant_id) const {
  for (const auto& v : variants) {
    if (v.variant_id() == variant_id) return &v;
  }
  return nullptr;
}

std::size_t Dataset::pair_count() const {
  std::size_t n = 0;
  for (const auto& v : variants) {
    for (const auto& q : v.questions) n += q.subquestions.size();
  }
  return n;
}

ProblemVariant render_variant(const Problem& problem, std::size_t p, const PermutationMap& map,
                              const GraphemeMatcher& matcher) {
  std::vector<AnnotatedDocument> documents{problem.preamble, problem.context};
  std::vector<KeyedText> answers;
  for (std::size_t j = 0; j < problem.questions.size(); ++j) {
    const auto& q = problem.questions[j];
    documents.push_back(q.body);
    for (const auto& s : q.subquestions) {
      documents.push_back(s.text);
      const auto key = std::to_string(j) + "/" + s.key;
      answers.push_back({key, s.answer});
      for (std::size_t a = 0; a < s.alternates.size(); ++a) {
        answers.push_back({alternate_key(key, a), s.alternates[a]});
      }
    }
  }

  const auto rendered = obfuscate_variant(documents, answers, map, matcher);

  ProblemVariant variant;
  variant.problem_id = problem.id;
  variant.p = p;
  variant.map = map;
  variant.difficulty = problem.difficulty;
  variant.preamble = rendered.documents[0];
  variant.context = rendered.documents[1];
  std::size_t doc = 2;
  std::size_t ans = 0;
  for (const auto& q : problem.questions) {
    RenderedQuestion out;
    out.body = rendered.documents[doc++];
    for (const auto& s : q.subquestions) {
      RenderedSubquestion sub;
      sub.key = s.key;
      sub.text = rendered.documents[doc++];
      sub.answer = rendered.answers[ans++].text;
      for (std::size_t a = 0; a < s.alternates.size(); ++a) {
        sub.alternates.push_back(rendered.answers[ans++].text);
      }
      out.subquestions.push_back(std::move(sub));
    }
    variant.questions.push_back(std::move(out));
  }
  return variant;
}

std::vector<PermutationMap> sample_problem_maps(const Problem& problem, std::size_t n,
                                                std::uint64_t seed, const GraphemeMatcher& matcher) {
  const auto spans = problem.problemese_spans();
  return sample_distinct(problem.ruleset, n, derive_seed(seed, fnv1a64(problem.id)),
                         [&](const PermutationMap& map) {
                           return std::all_of(spans.begin(), spans.end(), [&](const auto& t) {
                             return matcher.is_stable(map, t);
                           });
                         });
}

Dataset build_dataset(const Corpus& corpus, std::size_t per_problem, std::uint64_t seed,
                      ObfuscationOptions options) {
  Dataset dataset;
  dataset.seed = seed;
  dataset.per_problem = per_problem;
  dataset.case_aware = options.case_aware;

  for (const auto& problem : corpus.problems) {
    const GraphemeMatcher matcher(problem.ruleset, options);
    const auto maps = sample_problem_maps(problem, per_problem, seed, matcher);

    dataset.variants.push_back(
        render_variant(problem, 0, PermutationMap::identity(problem.ruleset), matcher));
    for (std::size_t k = 0; k < maps.size(); ++k) {
      dataset.variants.push_back(render_variant(problem, k + 1, maps[k], matcher));
    }
    dataset.problems.push_back(
        {problem.id, problem.difficulty, problem.language_meta.speakers, maps.size() + 1});
  }
  return dataset;
}

std::vector<std::string> variant_lines(const ProblemVariant& variant) {
  std::vector<std::string> lines;
  for (std::size_t j = 0; j < variant.questions.size(); ++j) {
    const auto& q = variant.questions[j];
    json line;
    line["variant_id"] = variant.variant_id();
    line["problem_id"] = variant.problem_id;
    line["p"] = variant.p;
    line["difficulty"] = to_string(variant.difficulty);
    line["map"] = to_json(variant.map);
    line["question_index"] = j + 1;
    line["question_count"] = variant.questions.size();
    line["preamble"] = variant.preamble;
    line["context"] = variant.context;
    line["body"] = q.body;
    json subs = json::array();
    for (const auto& s : q.subquestions) {
      subs.push_back(
          {{"key", s.key}, {"text", s.text}, {"answer", s.answer}, {"alternates", s.alternates}});
    }
    line["subquestions"] = std::move(subs);
    lines.push_back(line.dump());
  }
  return lines;
}

json dataset_manifest(const Dataset& dataset) {
  json manifest;
  manifest["schema_version"] = kDatasetSchema;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["seed"] = dataset.seed;
  manifest["per_problem"] = dataset.per_problem;
  manifest["case_aware"] = dataset.case_aware;

  json problems = json::array();
  for (const auto& info : dataset.problems) {
    problems.push_back({{"id", info.id},
                        {"difficulty", to_string(info.difficulty)},
                        {"speakers", info.speakers},
                        {"variants", info.variants}});
  }
  manifest["problems"] = std::move(problems);

  json variants = json::array();
  std::string stream;
  std::size_t original_pairs = 0;
  std::size_t obfuscated_pairs = 0;
  for (const auto& v : dataset.variants) {
    std::string block;
    for (const auto& line : variant_lines(v)) block += line + "\n";
    stream += block;
    variants.push_back({{"variant_id", v.variant_id()}, {"digest", sha256_hex(block)}});
    for (const auto& q : v.questions) {
      (v.p == 0 ? original_pairs : obfuscated_pairs) += q.subquestions.size();
    }
  }
  manifest["variants"] = std::move(variants);
  manifest["pairs"] = {{"original", original_pairs},
                       {"obfuscated", obfuscated_pairs},
                       {"total", original_pairs + obfuscated_pairs}};
  manifest["digest"] = sha256_hex(stream);
  return manifest;
}

std::string save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  std::string stream;
  for (const auto& v : dataset.variants) {
    for (const auto& line : variant_lines(v)) stream += line + "\n";
  }
  const auto manifest = dataset_manifest(dataset);
  write_text_file(dir / "variants.jsonl", stream);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest["digest"].get<std::string>();
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest_text = read_text_file(dir / "manifest.json");
  const auto stream = read_text_file(dir / "variants.jsonl");
  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("dataset manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("schema_version", 0) != kDatasetSchema) {
    throw ValidationError("dataset manifest.json: unsupported schema_version");
  }
  if (manifest.value("digest", std::string()) != sha256_hex(stream)) {
    throw ValidationError("dataset variants.jsonl does not match the manifest digest");
  }

  Dataset dataset;
  dataset.seed = manifest.at("seed").get<std::uint64_t>();
  dataset.per_problem = manifest.at("per_problem").get<std::size_t>();
  dataset.case_aware = manifest.value("case_aware", true);
  for (const auto& info : manifest.at("problems")) {
    dataset.problems.push_back({info.at("id").get<std::string>(),
                                difficulty_from_string(info.at("difficulty").get<std::string>()),
                                info.at("speakers").get<std::uint64_t>(),
                                info.at("variants").get<std::size_t>()});
  }

  std::istringstream lines(stream);
  std::string text;
  std::size_t line_number = 0;
  while (std::getline(lines, text)) {
    ++line_number;
    if (text.empty()) continue;
    json line;
    try {
      line = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError("variants.jsonl line " + std::to_string(line_number) + ": " + e.what());
    }
    const auto variant_id = line.at("variant_id").get<std::string>();
    if (dataset.variants.empty() || dataset.variants.back().variant_id() != variant_id) {
      ProblemVariant v;
      v.problem_id = line.at("problem_id").get<std::string>();
      v.p = line.at("p").get<std::size_t>();
      v.map = map_from_json(line.at("map"));
      v.difficulty = difficulty_from_string(line.at("difficulty").get<std::string>());
      v.preamble = line.at("preamble").get<std::string>();
      v.context = line.at("context").get<std::string>();
      dataset.variants.push_back(std::move(v));
    }
    RenderedQuestion q;
    q.body = line.at("body").get<std::string>();
    for (const auto& s : line.at("subquestions")) {
      q.subquestions.push_back({s.at("key").get<std::string>(), s.at("text").get<std::string>(),
                                s.at("answer").get<std::string>(),
                                s.at("alternates").get<std::vector<std::string>>()});
    }
    dataset.variants.back().questions.push_back(std::move(q));
  }
  return dataset;
}

namespace {

void count_into(CorpusStats& stats, Difficulty level, const std::string& type, bool original,
                std::size_t n) {
  auto bump = [&](LevelCounts& c) { (original ? c.unobfuscated : c.obfuscated) += n; };
  bump(stats.by_difficulty[level]);
  bump(stats.by_answer_type[type]);
  bump(stats.total);
}

CorpusStats empty_stats() {
  CorpusStats stats;
  for (const auto level : kDifficulties) stats.by_difficulty[level] = {};
  for (const auto type :
       {AnswerType::Digit, AnswerType::SingleChar, AnswerType::YesNo, AnswerType::Other}) {
    stats.by_answer_type[std::string(to_string(type))] = {};
  }
  return stats;
}

}  // namespace

CorpusStats corpus_stats(const Dataset& dataset) {
  auto stats = empty_stats();
  std::map<std::string, const ProblemVariant*> originals;
  for (const auto& v : dataset.variants) {
    if (v.p == 0) originals[v.problem_id] = &v;
  }
  for (const auto& v : dataset.variants) {
    const auto* original = originals.count(v.problem_id) ? originals[v.problem_id] : &v;
    for (std::size_t j = 0; j < v.questions.size(); ++j) {
      for (std::size_t k = 0; k < v.questions[j].subquestions.size(); ++k) {
        const auto& gold = original->questions.at(j).subquestions.at(k).answer;
        count_into(stats, v.difficulty, std::string(to_string(answer_type(gold))), v.p == 0, 1);
      }
    }
  }
  return stats;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  auto stats = empty_stats();
  for (const auto& problem : corpus.problems) {
    for (const auto& q : problem.questions) {
      for (const auto& s : q.subquestions) {
        count_into(stats, problem.difficulty,
                   std::string(to_string(answer_type(render(parse(s.answer))))), true, 1);
      }
    }
  }
  return stats;
}

std::string CorpusStats::to_csv() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << "group,category,unobfuscated,unobfuscated_pct,obfuscated,obfuscated_pct\n";
  for (const auto& [level, c] : by_difficulty) {
    out << "difficulty," << to_string(level) << ',' << c.unobfuscated << ','
        << percent(c.unobfuscated, total.unobfuscated) << ',' << c.obfuscated << ','
        << percent(c.obfuscated, total.obfuscated) << '\n';
  }
  for (const auto& [type, c] : by_answer_type) {
    out << "answer_type," << type << ',' << c.unobfuscated << ','
        << percent(c.unobfuscated, total.unobfuscated) << ',' << c.obfuscated << ','
        << percent(c.obfuscated, total.obfuscated) << '\n';
  }
  out << "total,all," << total.unobfuscated << ",100.0," << total.obfuscated << ",100.0\n";
  return out.str();
}

std::string CorpusStats::to_markdown() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << "| Difficulty Level | Unobfuscated | Obfuscated |\n|---|---:|---:|\n";
  for (const auto& [level, c] : by_difficulty) {
    out << "| " << to_string(level) << " | " << c.unobfuscated << " ("
        << percent(c.unobfuscated, total.unobfuscated) << "%) | " << c.obfuscated << " ("
        << percent(c.obfuscated, total.obfuscated) << "%) |\n";
  }
  return out.str();
}

}  // namespace lingobf
