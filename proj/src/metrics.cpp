#include "lingobf/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lingobf/prompt.hpp"

namespace lingobf {
using nlohmann::json;
using boost::multiprecision::cpp_int;

ScoredProblem make_scored_problem(std::string id, std::size_t versions,
                                  std::span<const std::size_t> subquestions_per_question) {
  ScoredProblem problem;
  problem.id = std::move(id);
  problem.versions = versions;
  for (const auto m : subquestions_per_question) {
    ScoredQuestion q;
    for (std::size_t k = 0; k < m; ++k) {
      q.keys.push_back(std::to_string(k + 1));
      q.answer_types.push_back(AnswerType::Other);
    }
    q.cells.assign(versions * m, 0);
    problem.questions.push_back(std::move(q));
  }
  return problem;
}

void check_tensor(const ScoreTensor& tensor) {
  std::vector<std::string> problems;
  for (const auto& p : tensor.problems) {
    auto fail = [&](const std::string& what) { problems.push_back(p.id + ": " + what); };
    if (p.versions == 0) fail("no original version");
    if (p.questions.empty()) fail("no questions");
    for (std::size_t j = 0; j < p.questions.size(); ++j) {
      const auto& q = p.questions[j];
      const auto where = "question " + std::to_string(j + 1);
      if (q.m() == 0) fail(where + " has no subquestions");
      if (q.answer_types.size() != q.m()) fail(where + " answer type count mismatch");
      if (q.cells.size() != q.m() * p.versions) fail(where + " cell count mismatch");
      if (std::any_of(q.cells.begin(), q.cells.end(), [](std::uint8_t c) { return c > 1; })) {
        fail(where + " has non-binary cells");
      }
    }
  }
  if (!problems.empty()) throw ValidationError("malformed score tensor", problems);
}

ScoreTensor score_run(std::span<const ResponseRecord> records, const Dataset& dataset,
                      std::string model, MatchOptions options) {
  std::map<std::string, const ResponseRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.prompt_id, &r);

  ScoreTensor tensor;
  tensor.model = std::move(model);
  tensor.case_sensitive = options.case_sensitive;
  std::set<std::string> known;

  for (const auto& info : dataset.problems) {
    ScoredProblem problem;
    problem.id = info.id;
    problem.difficulty = info.difficulty;
    problem.speakers = info.speakers;
    problem.versions = info.variants;
    const auto* original = dataset.find(make_variant_id(info.id, 0));
    if (original == nullptr) throw ValidationError("dataset lacks the original of " + info.id);
    for (const auto& q : original->questions) {
      ScoredQuestion sq;
      for (const auto& sub : q.subquestions) {
        sq.keys.push_back(sub.key);
        sq.answer_types.push_back(answer_type(sub.answer));
      }
      sq.cells.assign(sq.m() * problem.versions, 0);
      problem.questions.push_back(std::move(sq));
    }

    for (std::size_t p = 0; p < problem.versions; ++p) {
      const auto* variant = dataset.find(make_variant_id(info.id, p));
      if (variant == nullptr) {
        throw ValidationError("dataset lacks variant " + make_variant_id(info.id, p));
      }
      for (std::size_t j = 0; j < variant->questions.size(); ++j) {
        const auto prompt_id = make_prompt_id(variant->variant_id(), j + 1);
        known.insert(prompt_id);
        auto& sq = problem.questions.at(j);
        const auto& subs = variant->questions[j].subquestions;
        const auto it = by_id.find(prompt_id);
        const ResponseRecord* record = it == by_id.end() ? nullptr : it->second;
        for (std::size_t k = 0; k < subs.size(); ++k) {
          auto miss = [&](std::string reason) {
            tensor.missing.push_back({prompt_id, subs[k].key, std::move(reason)});
          };
          if (record == nullptr) {
            miss("missing_record");
            continue;
          }
          if (record->status != ResponseStatus::Ok || !record->parsed) {
            miss(std::string(to_string(record->status)));
            continue;
          }
          const auto answer = record->parsed->find(subs[k].key);
          if (answer == record->parsed->end()) {
            miss("missing_key");
            continue;
          }
          sq.at(k, p) = static_cast<std::uint8_t>(
              exact_match(answer->second, subs[k].answer, subs[k].alternates, options));
        }
      }
    }
    tensor.problems.push_back(std::move(problem));
  }

  for (const auto& r : records) {
    if (!known.contains(r.prompt_id)) {
      throw Error("unknown_prompt", "record prompt_id " + r.prompt_id + " is not in the dataset");
    }
  }
  return tensor;
}

json to_json(const ScoreTensor& tensor) {
  json problems = json::array();
  for (const auto& p : tensor.problems) {
    json questions = json::array();
    for (const auto& q : p.questions) {
      json types = json::array();
      for (const auto t : q.answer_types) types.push_back(to_string(t));
      json rows = json::array();
      for (std::size_t v = 0; v < p.versions; ++v) {
        std::string row;
        for (std::size_t k = 0; k < q.m(); ++k) row += q.at(k, v) ? '1' : '0';
        rows.push_back(row);
      }
      questions.push_back({{"keys", q.keys}, {"answer_types", types}, {"scores", rows}});
    }
    problems.push_back({{"id", p.id},
                        {"difficulty", to_string(p.difficulty)},
                        {"speakers", p.speakers},
                        {"versions", p.versions},
                        {"questions", questions}});
  }
  json missing = json::array();
  for (const auto& m : tensor.missing) {
    missing.push_back({{"prompt_id", m.prompt_id}, {"key", m.key}, {"reason", m.reason}});
  }
  return {{"schema_version", 1},
          {"model", tensor.model},
          {"case_sensitive", tensor.case_sensitive},
          {"problems", problems},
          {"missing", missing}};
}

namespace {

AnswerType answer_type_from_string(const std::string& name) {
  for (const auto t : {AnswerType::Digit, AnswerType::SingleChar, AnswerType::YesNo,
                       AnswerType::Other}) {
    if (to_string(t) == name) return t;
  }
  throw ValidationError("unknown answer type " + name);
}

}  // namespace

ScoreTensor tensor_from_json(const json& doc) {
  ScoreTensor tensor;
  try {
    if (doc.at("schema_version") != 1) throw ValidationError("unsupported score schema_version");
    tensor.model = doc.at("model").get<std::string>();
    tensor.case_sensitive = doc.value("case_sensitive", true);
    for (const auto& p : doc.at("problems")) {
      ScoredProblem problem;
      problem.id = p.at("id").get<std::string>();
      problem.difficulty = difficulty_from_string(p.at("difficulty").get<std::string>());
      problem.speakers = p.at("speakers").get<std::uint64_t>();
      problem.versions = p.at("versions").get<std::size_t>();
      for (const auto& q : p.at("questions")) {
        ScoredQuestion sq;
        sq.keys = q.at("keys").get<std::vector<std::string>>();
        for (const auto& t : q.at("answer_types")) {
          sq.answer_types.push_back(answer_type_from_string(t.get<std::string>()));
        }
        const auto& rows = q.at("scores");
        if (rows.size() != problem.versions) throw ValidationError(problem.id + ": row count");
        for (const auto& row : rows) {
          const auto text = row.get<std::string>();
          if (text.size() != sq.m()) throw ValidationError(problem.id + ": row width");
          for (const char c : text) {
            if (c != '0' && c != '1') throw ValidationError(problem.id + ": non-binary score");
            sq.cells.push_back(static_cast<std::uint8_t>(c - '0'));
          }
        }
        problem.questions.push_back(std::move(sq));
      }
      tensor.problems.push_back(std::move(problem));
    }
    for (const auto& m : doc.value("missing", json::array())) {
      tensor.missing.push_back({m.at("prompt_id").get<std::string>(), m.at("key").get<std::string>(),
                                m.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("score tensor: ") + e.what());
  }
  check_tensor(tensor);
  return tensor;
}

void save_tensor(const ScoreTensor& tensor, const std::filesystem::path& path) {
  write_text_file(path, to_json(tensor).dump(2) + "\n");
}

ScoreTensor load_tensor(const std::filesystem::path& path) {
  const auto doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return tensor_from_json(doc);
}

Rational TypeCounts::original_score() const {
  return original_pairs == 0 ? Rational(0) : Rational(original_correct, original_pairs);
}

Rational TypeCounts::obfuscated_score() const {
  return obfuscated_pairs == 0 ? Rational(0) : Rational(obfuscated_correct, obfuscated_pairs);
}

namespace {

ProblemMetrics problem_metrics(const ScoredProblem& p, const AggregateOptions& options) {
  ProblemMetrics out;
  out.id = p.id;
  out.difficulty = p.difficulty;
  out.speakers = p.speakers;
  out.obfuscations = p.obfuscations();
  const auto n = p.questions.size();
  out.version_scores.assign(p.versions, Rational(0));
  Rational og = 0;
  Rational obf = 0;
  Rational rob = 0;
  for (const auto& q : p.questions) {
    const auto m = q.m();
    std::vector<std::size_t> sums(p.versions, 0);
    for (std::size_t v = 0; v < p.versions; ++v) {
      for (std::size_t k = 0; k < m; ++k) sums[v] += q.at(k, v);
      out.version_scores[v] += Rational(sums[v], m);
    }
    og += Rational(sums[0], m);
    if (p.versions > 1) {
      std::size_t total = 0;
      for (std::size_t v = 1; v < p.versions; ++v) total += sums[v];
      obf += Rational(total, p.obfuscations() * m);
    }
    const auto first = options.robust_min_includes_original || p.versions == 1 ? 0 : 1;
    rob += Rational(*std::min_element(sums.begin() + first, sums.end()), m);
  }
  for (auto& v : out.version_scores) v /= n;
  out.m_og = og / n;
  out.m_obf = obf / n;
  out.m_rob = rob / n;
  for (std::size_t v = 1; v < p.versions; ++v) {
    out.delta_by_version.push_back(out.version_scores[v] - out.version_scores[0]);
    out.delta += out.delta_by_version.back();
  }
  if (p.versions > 1) out.delta /= p.obfuscations();
  return out;
}

void accumulate(Aggregate& a, const ProblemMetrics& pm) {
  ++a.problems;
  a.m_og += pm.m_og;
  a.m_rob += pm.m_rob;
  if (pm.obfuscations > 0) {
    ++a.obfuscated_problems;
    a.m_obf += pm.m_obf;
  }
}

void finish(Aggregate& a) {
  if (a.problems > 0) {
    a.m_og /= a.problems;
    a.m_rob /= a.problems;
  }
  if (a.obfuscated_problems > 0) a.m_obf /= a.obfuscated_problems;
}

}  // namespace

MetricsReport aggregate(const ScoreTensor& tensor, AggregateOptions options) {
  check_tensor(tensor);
  MetricsReport report;
  report.model = tensor.model;
  report.case_sensitive = tensor.case_sensitive;
  report.options = options;
  for (const auto& p : tensor.problems) {
    auto pm = problem_metrics(p, options);
    accumulate(report.overall, pm);
    accumulate(report.by_difficulty[p.difficulty], pm);
    for (const auto& q : p.questions) {
      for (std::size_t k = 0; k < q.m(); ++k) {
        auto& counts = report.by_answer_type[q.answer_types[k]];
        ++counts.original_pairs;
        counts.original_correct += q.at(k, 0);
        for (std::size_t v = 1; v < p.versions; ++v) {
          ++counts.obfuscated_pairs;
          counts.obfuscated_correct += q.at(k, v);
        }
      }
    }
    report.problems.push_back(std::move(pm));
  }
  finish(report.overall);
  for (auto& [level, a] : report.by_difficulty) finish(a);
  return report;
}

std::string format_decimal(const Rational& value, int digits) {
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;
  const cpp_int num = boost::multiprecision::numerator(magnitude) * scale;
  const cpp_int den = boost::multiprecision::denominator(magnitude);
  cpp_int q = num / den;
  if ((num % den) * 2 >= den) ++q;
  std::string text = q.str();
  if (text.size() <= static_cast<std::size_t>(digits)) {
    text.insert(0, static_cast<std::size_t>(digits) + 1 - text.size(), '0');
  }
  if (digits > 0) text.insert(text.size() - static_cast<std::size_t>(digits), ".");
  if (negative && q != 0) text.insert(0, "-");
  return text;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

namespace {

json aggregate_json(const Aggregate& a) {
  return {{"problems", a.problems},
          {"obfuscated_problems", a.obfuscated_problems},
          {"M_og", format_decimal(a.m_og)},
          {"M_obf", format_decimal(a.m_obf)},
          {"M_rob", format_decimal(a.m_rob)}};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json summary_json(const MetricsReport& report) {
  json levels = json::object();
  for (const auto& [level, a] : report.by_difficulty) {
    levels[std::string(to_string(level))] = aggregate_json(a);
  }
  json types = json::object();
  for (const auto& [type, c] : report.by_answer_type) {
    types[std::string(to_string(type))] = {{"original_pairs", c.original_pairs},
                                           {"original_score", format_decimal(c.original_score())},
                                           {"obfuscated_pairs", c.obfuscated_pairs},
                                           {"obfuscated_score",
                                            format_decimal(c.obfuscated_score())}};
  }
  json problems = json::array();
  for (const auto& p : report.problems) {
    json deltas = json::array();
    for (const auto& d : p.delta_by_version) deltas.push_back(format_decimal(d));
    problems.push_back({{"id", p.id},
                        {"M_og", format_decimal(p.m_og)},
                        {"M_obf", format_decimal(p.m_obf)},
                        {"M_rob", format_decimal(p.m_rob)},
                        {"delta_obf", format_decimal(p.delta)},
                        {"delta_obf_by_version", deltas}});
  }
  return {{"schema_version", 1},
          {"model", report.model},
          {"options",
           {{"case_sensitive", report.case_sensitive},
            {"robust_min_includes_original", report.options.robust_min_includes_original}}},
          {"overall", aggregate_json(report.overall)},
          {"by_difficulty", levels},
          {"by_answer_type", types},
          {"problems", problems}};
}

std::string per_problem_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "model,problem_id,difficulty,speakers,obfuscations,m_og,m_obf,m_rob,delta_obf,"
         "delta_obf_by_version\n";
  for (const auto& p : report.problems) {
    std::string deltas;
    for (const auto& d : p.delta_by_version) {
      if (!deltas.empty()) deltas += ';';
      deltas += format_decimal(d);
    }
    out << csv_field(report.model) << ',' << csv_field(p.id) << ',' << to_string(p.difficulty)
        << ',' << p.speakers << ',' << p.obfuscations << ',' << format_decimal(p.m_og) << ','
        << format_decimal(p.m_obf) << ',' << format_decimal(p.m_rob) << ','
        << format_decimal(p.delta) << ',' << deltas << '\n';
  }
  return out.str();
}

std::string answer_type_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "model,answer_type,original_pairs,original_score,obfuscated_pairs,obfuscated_score\n";
  for (const auto& [type, c] : report.by_answer_type) {
    out << csv_field(report.model) << ',' << to_string(type) << ',' << c.original_pairs << ','
        << format_decimal(c.original_score()) << ',' << c.obfuscated_pairs << ','
        << format_decimal(c.obfuscated_score()) << '\n';
  }
  return out.str();
}

std::string delta_heatmap_csv(std::span<const MetricsReport> reports) {
  std::map<std::string, std::map<std::size_t, std::string>> rows;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    for (const auto& p : reports[r].problems) rows[p.id][r] = format_decimal(p.delta);
  }
  std::ostringstream out;
  out << "problem_id";
  for (const auto& r : reports) out << ',' << csv_field(r.model);
  out << '\n';
  for (const auto& [id, cells] : rows) {
    out << csv_field(id);
    for (std::size_t r = 0; r < reports.size(); ++r) {
      const auto it = cells.find(r);
      out << ',' << (it == cells.end() ? "" : it->second);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace lingobf
