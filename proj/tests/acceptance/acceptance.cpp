// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fail.
//
// usage: lingobf_acceptance <path to lingobf cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>

#include "lingobf/annotation.hpp"
#include "lingobf/corpus.hpp"
#include "lingobf/dataset.hpp"
#include "lingobf/metrics.hpp"
#include "lingobf/obfuscation.hpp"
#include "lingobf/ruleset.hpp"
#include "lingobf/stats.hpp"
#include "pipeline.hpp"
#include "support.hpp"

using namespace lingobf;
using support::fixture;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool condition, const std::string& why) {
    if (!condition) fail(why);
  }
};

int g_failed = 0;

void criterion(int number, const std::string& name, std::chrono::microseconds limit,
               const std::function<void(Outcome&)>& body) {
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(outcome);
  } catch (const std::exception& e) {
    outcome.fail(std::string("exception: ") + e.what());
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  if (outcome.ok && elapsed > limit) {
    outcome.fail("took " + std::to_string(elapsed.count()) + " us, limit " +
                 std::to_string(limit.count()) + " us");
  }
  char timing[64];
  std::snprintf(timing, sizeof(timing), "%.3f ms", static_cast<double>(elapsed.count()) / 1000.0);
  std::cout << (outcome.ok ? "PASS" : "FAIL") << " [" << number << "] " << name << " (" << timing
            << ")";
  if (!outcome.ok) std::cout << ": " << outcome.detail;
  std::cout << std::endl;
  if (!outcome.ok) ++g_failed;
}

using std::chrono::milliseconds;
using std::chrono::seconds;

Ruleset ruleset_fixture(const std::string& name) {
  return load_ruleset(fixture("rulesets/" + name).string());
}

// Every Problemese span of every fixture problem.
std::vector<std::pair<Problem, std::vector<std::string>>> fixture_spans() {
  const auto corpus = load_corpus(fixture("corpus"));
  std::vector<std::pair<Problem, std::vector<std::string>>> out;
  for (const auto& p : corpus.problems) out.emplace_back(p, p.problemese_spans());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: lingobf_acceptance <lingobf cli>\n";
    return 2;
  }
  const std::filesystem::path cli = argv[1];

  criterion(1, "permutation counts 6 / 36 / 72", milliseconds(1), [](Outcome& o) {
    Ruleset table;
    table.tables.push_back({{{"p", "b"}, {"t", "d"}, {"k", "g"}}});
    Ruleset sets;
    sets.sets = {{"p", "t", "k"}, {"b", "d", "g"}};
    Ruleset free;
    free.free_tables.push_back({{{{"m"}, {"p", "b", "f"}}, {{"n"}, {"t", "d", "s"}}}});
    o.expect(count_permutations(table) == 6, "table count " + count_permutations(table).str());
    o.expect(count_permutations(sets) == 36, "sets count " + count_permutations(sets).str());
    o.expect(count_permutations(free) == 72, "free-table count " + count_permutations(free).str());
  });

  criterion(2, "sampled maps are structure-preserving derangements", seconds(5), [](Outcome& o) {
    std::size_t maps = 0;
    for (const auto* name : {"somali.json", "stodsde.json"}) {
      const auto ruleset = ruleset_fixture(name);
      for (std::uint64_t seed = 0; seed < 600; ++seed) {
        const auto map = sample_permutation(ruleset, seed);
        const auto problems = check_map(map, ruleset, {.require_derangement = true});
        ++maps;
        if (!problems.empty()) {
          o.fail(std::string(name) + " seed " + std::to_string(seed) + ": " + problems.front());
          return;
        }
        for (const auto& f : ruleset.fixed) {
          if (map(f) != f) o.fail(std::string(name) + ": fixed string " + f + " moved");
        }
      }
    }
    o.expect(maps >= 1000, "only " + std::to_string(maps) + " maps");
  });

  criterion(3, "apply(invert(m), apply(m, t)) == t on fixtures", seconds(5), [](Outcome& o) {
    for (const auto& [problem, spans] : fixture_spans()) {
      const GraphemeMatcher matcher(problem.ruleset);
      // Maps as generation draws them: stable on this problem's text.
      std::size_t drawn = 0;
      for (std::uint64_t seed = 0; drawn < 50 && seed < 10000; ++seed) {
        const auto map = sample_permutation(problem.ruleset, seed);
        bool stable = true;
        for (const auto& t : spans) stable = stable && matcher.is_stable(map, t);
        if (!stable) continue;
        ++drawn;
        const auto inverse = invert(map);
        for (const auto& t : spans) {
          const auto back = matcher.apply(inverse, matcher.apply(map, t));
          if (back != t) {
            o.fail(problem.id + ": \"" + t + "\" came back as \"" + back + "\"");
            return;
          }
        }
      }
      o.expect(drawn == 50, problem.id + ": only " + std::to_string(drawn) + " stable maps");
    }
  });

  criterion(4, "greedy segmentation totality and hand traces", seconds(10), [](Outcome& o) {
    Ruleset shash;
    shash.sets = {{"s", "h", "a", "sh"}};
    const auto units = segment("shash", shash).units;
    std::vector<std::string> texts;
    for (const auto& u : units) texts.push_back(u.text);
    o.expect(texts == std::vector<std::string>{"sh", "a", "sh"}, "shash did not segment as sh|a|sh");

    Ruleset named;
    named.fixed = {"Kazune"};
    named.sets = {{"a", "z", "e", "l"}};
    const auto kaz = segment("Kazune azzel", named).units;
    o.expect(kaz.size() == 7 && kaz[0].kind == UnitKind::Fixed && kaz[0].text == "Kazune" &&
                 kaz[1].kind == UnitKind::Passthrough && kaz[1].text == " ",
             "Kazune azzel segmentation");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto map = sample_permutation(named, seed);
      o.expect(apply(map, "Kazune", named) == "Kazune", "fixed name changed");
    }

    Rng rng(20240601);
    const auto somali = ruleset_fixture("somali.json");
    const auto stodsde = ruleset_fixture("stodsde.json");
    const GraphemeMatcher m1(somali);
    const GraphemeMatcher m2(stodsde);
    std::vector<std::string> pieces = somali.inventory();
    for (const auto& g : stodsde.inventory()) pieces.push_back(g);
    for (const auto& f : stodsde.fixed) pieces.push_back(f);
    for (int i = 0; i < 10000; ++i) {
      const auto text = support::random_text(rng, pieces);
      const auto& matcher = i % 2 == 0 ? m1 : m2;
      if (matcher.segment(text).joined() != text) {
        o.fail("concatenation differs from input on fuzz case " + std::to_string(i));
        return;
      }
    }
  });

  criterion(5, "annotation round trip and marker errors", seconds(1), [](Outcome& o) {
    std::vector<std::filesystem::path> files;
    for (const auto& dir : {"annotation", "corpus/harmony", "corpus/nouns", "corpus/voicing"}) {
      for (const auto& e : std::filesystem::directory_iterator(fixture(dir))) {
        if (e.path().extension() == ".txt") files.push_back(e.path());
      }
    }
    o.expect(files.size() >= 8, "fixture files missing");
    std::set<SegmentKind> kinds;
    for (const auto& f : files) {
      const auto text = read_text_file(f);
      const auto doc = parse(text);
      for (const auto& s : doc.segments) kinds.insert(s.kind);
      o.expect(doc.serialize() == text, f.filename().string() + " did not round-trip");
    }
    o.expect(kinds.size() == 4, "fixtures do not cover all four segment kinds");

    auto offset_of = [](std::string_view text) -> std::optional<std::size_t> {
      try {
        parse(text);
      } catch (const ParseError& e) {
        return e.offset();
      }
      return std::nullopt;
    };
    o.expect(offset_of("ab @@@cd") == 3u, "unbalanced opener offset");
    o.expect(offset_of("@@@ab $$$x$$$ cd@@@") == 6u, "nested marker offset");
    o.expect(offset_of("x &&&y @@@z@@@&&&") == 7u, "nested problemese offset");
  });

  criterion(6, "metrics match brute-force oracle exactly", seconds(5), [](Outcome& o) {
    auto t = ScoreTensor{};
    const std::size_t shape[] = {2};
    auto p = make_scored_problem("fixture", 3, shape);
    auto& q = p.questions[0];
    q.at(0, 0) = 1;
    q.at(1, 0) = 1;
    q.at(0, 1) = 1;
    q.at(1, 1) = 0;
    q.at(0, 2) = 0;
    q.at(1, 2) = 0;
    t.problems.push_back(p);
    const auto r = aggregate(t);
    o.expect(r.overall.m_og == 1, "M_og");
    o.expect(r.overall.m_obf == Rational(1, 4), "M_obf");
    o.expect(r.problems[0].delta_by_version ==
                 std::vector<Rational>{Rational(-1, 2), Rational(-1)},
             "delta by version");
    o.expect(r.problems[0].delta == Rational(-3, 4), "delta");
    o.expect(r.overall.m_rob == 0, "M_rob");

    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
      const auto tensor = support::random_tensor(rng);
      for (const bool with_original : {true, false}) {
        const auto report = aggregate(tensor, {.robust_min_includes_original = with_original});
        const auto oracle = support::oracle_metrics(tensor, with_original);
        if (report.overall.m_og != oracle.m_og || report.overall.m_obf != oracle.m_obf ||
            report.overall.m_rob != oracle.m_rob) {
          o.fail("overall mismatch on trial " + std::to_string(trial));
          return;
        }
        for (std::size_t i = 0; i < tensor.problems.size(); ++i) {
          if (report.problems[i].delta != oracle.delta[i] ||
              report.problems[i].delta_by_version != oracle.delta_by_p[i]) {
            o.fail("delta mismatch on trial " + std::to_string(trial));
            return;
          }
        }
        for (const auto& [level, a] : report.by_difficulty) {
          const auto ol = support::oracle_metrics(tensor, with_original, level);
          if (a.m_og != ol.m_og || a.m_obf != ol.m_obf || a.m_rob != ol.m_rob) {
            o.fail("difficulty mismatch on trial " + std::to_string(trial));
            return;
          }
        }
      }
    }
  });

  criterion(7, "dataset pair accounting with a 2-map problem", seconds(1), [](Outcome& o) {
    const auto corpus = load_corpus(fixture("corpus"));
    o.expect(corpus.report.ok() && corpus.problems.size() == 3, "fixture corpus did not load");
    const auto dataset = build_dataset(corpus, 6, 7);
    std::size_t expected = 0;
    std::size_t full = 0;
    for (const auto& info : dataset.problems) {
      const auto* original = dataset.find(make_variant_id(info.id, 0));
      std::size_t m = 0;
      for (const auto& q : original->questions) m += q.subquestions.size();
      expected += info.variants * m;
      full += 7 * m;
      if (info.id == "voicing") {
        const auto& voicing = *std::find_if(corpus.problems.begin(), corpus.problems.end(),
                                            [](const Problem& p) { return p.id == "voicing"; });
        o.expect(count_cycle_permutations(voicing.ruleset) == 2, "voicing admits != 2 maps");
        o.expect(info.variants == 3, "voicing has " + std::to_string(info.variants) + " versions");
      } else {
        o.expect(info.variants == 7, info.id + " has " + std::to_string(info.variants));
      }
    }
    o.expect(dataset.pair_count() == expected,
             "pairs " + std::to_string(dataset.pair_count()) + " != " + std::to_string(expected));
    o.expect(dataset.variants.size() == 17, "variant count");
    o.expect(expected < full, "shortfall not reflected");
  });

  criterion(8, "bootstrap calibration and determinism", seconds(2), [](Outcome& o) {
    ScoreTensor t;
    const std::size_t shape[] = {1};
    for (int i = 0; i < 2; ++i) {
      auto p = make_scored_problem("b" + std::to_string(i), 2, shape);
      p.questions[0].at(0, 0) = 1;
      p.questions[0].at(0, 1) = 0;
      t.problems.push_back(p);
    }
    // Exact distribution {0: 1/4, 0.5: 1/2, 1: 1/4}.
    const double expectation = 0.5;
    const double sigma = std::sqrt(0.25 * 0.25 + 0.5 * 0.0 + 0.25 * 0.25);
    const auto a = bootstrap(t, 500, 1);
    const auto b = bootstrap(t, 500, 1);
    const double tolerance = 3.0 * sigma / std::sqrt(500.0);
    const double m = mean(a.set_scores);
    o.expect(a.set_scores.size() == 500, "set count");
    o.expect(std::fabs(m - expectation) <= tolerance,
             "mean " + std::to_string(m) + " outside " + std::to_string(tolerance));
    o.expect(std::memcmp(a.set_scores.data(), b.set_scores.data(), 500 * sizeof(double)) == 0,
             "set scores differ between runs");
  });

  criterion(9, "OLS exact fits", milliseconds(1), [](Outcome& o) {
    const std::vector<double> x = {0, 1, 2, 3, 4};
    const std::vector<double> y = {1, 3, 5, 7, 9};
    const auto line = ols_fit(x, y);
    o.expect(line.slope == 2.0 && line.intercept == 1.0 && line.r_squared == 1.0, "y = 2x + 1");
    // Normal equations for (0,0),(1,1),(2,1):
    //   [3 3; 3 5] [a; b] = [2; 3]  ->  b = 1/2, a = 1/6
    const auto three = ols_fit(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 1});
    o.expect(std::fabs(three.slope - 0.5) < 1e-9, "3-point slope");
    o.expect(std::fabs(three.intercept - 1.0 / 6.0) < 1e-9, "3-point intercept");
    o.expect(std::fabs(three.r_squared - 0.75) < 1e-9, "3-point R^2");
  });

  criterion(10, "end-to-end golden run through the CLI", seconds(30), [&](Outcome& o) {
    support::TempDir first;
    support::TempDir second;
    const auto a = support::run_pipeline(cli, first.path());
    const auto b = support::run_pipeline(cli, second.path());
    for (const auto& f : a.failures) o.fail("step failed: " + f);
    for (const auto& f : b.failures) o.fail("step failed on rerun: " + f);
    o.expect(a.digests.size() == support::golden_artifacts().size(), "artifacts missing");
    o.expect(a.digests == b.digests, "artifacts differ between runs");
    const auto mismatches = support::check_golden(a.digests);
    if (!mismatches.empty()) o.fail("golden digest mismatch: " + mismatches.front());
    o.expect(a.errors.empty == 2, "empty responses: " + std::to_string(a.errors.empty));
    o.expect(a.errors.bad_parsing == 1, "bad parsing: " + std::to_string(a.errors.bad_parsing));
    o.expect(a.errors.transport_error == 0, "transport errors");
    const auto table = read_text_file(first.path() / "report/errors.md");
    o.expect(table.find("| mock-model | 41 | 2 | 1 |") != std::string::npos, "error table row");
  });

  criterion(11, "no-context dictionary model: M_og > 0, Other-type M_obf = 0", seconds(10),
            [](Outcome& o) {
              const auto corpus = load_corpus(fixture("corpus"));
              const auto dataset = build_dataset(corpus, 6, 11);
              const auto prompts = build_prompts(dataset, std::nullopt, {.no_context = true});
              const support::DictionaryModel model(dataset);
              std::vector<ResponseRecord> records;
              for (const auto& p : prompts) {
                o.expect(p.user_message.find("@@@") == std::string::npos, "markers leaked");
                ResponseRecord r;
                r.prompt_id = p.prompt_id;
                r.raw_text = nlohmann::json(model.answer(p.user_message, p.expected_keys)).dump();
                const auto parsed = parse_response(r.raw_text, p.expected_keys);
                r.parsed = parsed.parsed;
                r.status = parsed.status;
                records.push_back(r);
              }
              const auto report = aggregate(score_run(records, dataset, "dictionary"));
              o.expect(report.overall.m_og > 0, "M_og is 0");
              const auto other = report.by_answer_type.at(AnswerType::Other);
              o.expect(other.original_correct > 0, "no Other-type answer correct on originals");
              o.expect(other.obfuscated_pairs > 0 && other.obfuscated_correct == 0,
                       "Other-type obfuscated correct = " +
                           std::to_string(other.obfuscated_correct));
            });

  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
