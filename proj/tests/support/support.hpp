#pragma once

// Helpers shared by the unit, acceptance and end-to-end tests.

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "lingobf/dataset.hpp"
#include "lingobf/eval_runner.hpp"
#include "lingobf/metrics.hpp"
#include "lingobf/prompt.hpp"
#include "lingobf/rng.hpp"
#include "lingobf/ruleset.hpp"

namespace support {

namespace fs = std::filesystem;
using nlohmann::json;

inline fs::path fixture(const std::string& relative) {
  return fs::path(LINGOBF_FIXTURES) / relative;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("lingobf-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// ---- seeded generators -----------------------------------------------------

// Pool of distinct graphemes, single and multi-codepoint, all NFC.
inline const std::vector<std::string>& grapheme_pool() {
  static const std::vector<std::string> pool = {
      "a",  "e",  "i",  "o",  "u",  "p",  "b",  "t",  "d",  "k",  "g",  "m",
      "n",  "s",  "z",  "l",  "r",  "w",  "y",  "f",  "v",  "h",  "q",  "x",
      "c",  "j",  "ö",  "ü",  "ı",  "ŋ",  "ɲ",  "ʁ",  "ɣ",  "ə",  "sh", "ch",
      "th", "dz", "ts", "ng", "kw", "gb", "aa", "ii", "uu", "ʃ",  "ʒ",  "ɬ"};
  return pool;
}

// Random valid ruleset: draws graphemes without replacement from the pool and
// deals them into sets, tables, free-tables and the fixed list.
inline lingobf::Ruleset random_ruleset(lingobf::Rng& rng) {
  std::vector<std::string> pool = grapheme_pool();
  rng.shuffle(std::span<std::string>(pool));
  std::size_t next = 0;
  auto take = [&] { return pool[next++]; };
  auto left = [&] { return pool.size() - next; };

  lingobf::Ruleset r;
  const auto n_fixed = rng.below(3);
  for (std::uint64_t i = 0; i < n_fixed && left() > 0; ++i) r.fixed.push_back(take());
  const auto n_sets = rng.below(3);
  for (std::uint64_t s = 0; s < n_sets; ++s) {
    const auto size = 2 + rng.below(4);
    if (left() < size) break;
    std::vector<std::string> set;
    for (std::uint64_t i = 0; i < size; ++i) set.push_back(take());
    r.sets.push_back(std::move(set));
  }
  const auto n_tables = rng.below(2);
  for (std::uint64_t t = 0; t < n_tables; ++t) {
    const auto cols = 2 + rng.below(3);
    const auto rows = 1 + rng.below(3);
    if (left() < cols * rows) break;
    lingobf::Table table;
    for (std::uint64_t c = 0; c < cols; ++c) {
      std::vector<std::string> col;
      for (std::uint64_t i = 0; i < rows; ++i) col.push_back(take());
      table.columns.push_back(std::move(col));
    }
    r.tables.push_back(std::move(table));
  }
  if (rng.below(2) == 0) {
    const auto cols = 2 + rng.below(2);
    const auto rows = 1 + rng.below(2);
    std::vector<std::size_t> sizes;
    std::size_t need = 0;
    for (std::uint64_t i = 0; i < rows; ++i) {
      sizes.push_back(1 + rng.below(3));
      need += sizes.back() * cols;
    }
    if (left() >= need) {
      lingobf::FreeTable ft;
      for (std::uint64_t c = 0; c < cols; ++c) {
        std::vector<std::vector<std::string>> col;
        for (std::uint64_t i = 0; i < rows; ++i) {
          std::vector<std::string> cell;
          for (std::size_t e = 0; e < sizes[i]; ++e) cell.push_back(take());
          col.push_back(std::move(cell));
        }
        ft.columns.push_back(std::move(col));
      }
      r.free_tables.push_back(std::move(ft));
    }
  }
  if (r.sets.empty() && r.tables.empty() && r.free_tables.empty()) {
    r.sets.push_back({take(), take()});
  }
  return r;
}

inline std::string encode_cp(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// Mix of inventory pieces, arbitrary codepoints, ASCII and raw bytes.
inline std::string random_text(lingobf::Rng& rng, const std::vector<std::string>& pieces,
                               std::size_t max_len = 24) {
  std::string out;
  const auto len = rng.below(max_len + 1);
  for (std::uint64_t i = 0; i < len; ++i) {
    switch (rng.below(6)) {
      case 0:
      case 1:
      case 2:
        if (!pieces.empty()) {
          out += pieces[rng.below(pieces.size())];
          break;
        }
        [[fallthrough]];
      case 3:
        out += static_cast<char>(0x20 + rng.below(0x5F));
        break;
      case 4: {
        char32_t cp;
        do {
          cp = static_cast<char32_t>(rng.below(0x10FFFF));
        } while (cp >= 0xD800 && cp <= 0xDFFF);
        out += encode_cp(cp);
        break;
      }
      default:
        out += static_cast<char>(rng.below(256));
        break;
    }
  }
  return out;
}

inline lingobf::ScoreTensor random_tensor(lingobf::Rng& rng, std::size_t max_n = 4,
                                          std::size_t max_q = 3, std::size_t max_m = 4,
                                          std::size_t max_p = 6) {
  lingobf::ScoreTensor t;
  t.model = "random";
  const auto n = 1 + rng.below(max_n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<std::size_t> shape;
    const auto q = 1 + rng.below(max_q);
    for (std::uint64_t j = 0; j < q; ++j) shape.push_back(1 + rng.below(max_m));
    auto problem = lingobf::make_scored_problem("p" + std::to_string(i),
                                                2 + rng.below(max_p), shape);
    problem.difficulty = lingobf::kDifficulties[rng.below(5)];
    problem.speakers = 1 + rng.below(1000000);
    for (auto& question : problem.questions) {
      for (auto& c : question.cells) c = static_cast<std::uint8_t>(rng.below(2));
      for (auto& a : question.answer_types) a = static_cast<lingobf::AnswerType>(rng.below(4));
    }
    t.problems.push_back(std::move(problem));
  }
  return t;
}

// ---- brute-force metrics oracle --------------------------------------------
//
// Direct transcription of the metric definitions as nested sums, one term
// per cell, with no shared intermediate values.

struct OracleMetrics {
  lingobf::Rational m_og, m_obf, m_rob;
  std::vector<lingobf::Rational> delta;                     // per problem
  std::vector<std::vector<lingobf::Rational>> delta_by_p;  // per problem, p = 1..P
};

inline OracleMetrics oracle_metrics(const lingobf::ScoreTensor& t, bool rob_includes_original,
                                    std::optional<lingobf::Difficulty> only = std::nullopt) {
  using lingobf::Rational;
  OracleMetrics out;
  std::vector<const lingobf::ScoredProblem*> problems;
  for (const auto& p : t.problems) {
    if (!only || p.difficulty == *only) problems.push_back(&p);
  }
  const std::size_t N = problems.size();
  std::size_t n_obf = 0;
  for (const auto* p : problems) n_obf += p->versions > 1 ? 1 : 0;
  for (const auto* p : problems) {
    const std::size_t n = p->questions.size();
    const std::size_t P = p->versions - 1;
    std::vector<Rational> d(P, Rational(0));
    for (const auto& q : p->questions) {
      const std::size_t m = q.m();
      for (std::size_t k = 0; k < m; ++k) {
        out.m_og += Rational(q.cells[k]) / (N * n * m);
        for (std::size_t v = 1; v <= P; ++v) {
          const int l = q.cells[v * m + k];
          out.m_obf += Rational(l) / (n_obf * n * P * m);
          d[v - 1] += Rational(l - q.cells[k]) / (n * m);
        }
      }
      std::size_t best = m + 1;
      for (std::size_t v = rob_includes_original ? 0 : 1; v <= P; ++v) {
        std::size_t sum = 0;
        for (std::size_t k = 0; k < m; ++k) sum += q.cells[v * m + k];
        best = std::min(best, sum);
      }
      if (P == 0) {
        best = 0;
        for (std::size_t k = 0; k < m; ++k) best += q.cells[k];
      }
      out.m_rob += Rational(best) / (N * n * m);
    }
    Rational mean = 0;
    for (const auto& x : d) mean += x / P;
    out.delta.push_back(P == 0 ? Rational(0) : mean);
    out.delta_by_p.push_back(d);
  }
  return out;
}

// ---- mock model ---------------------------------------------------------------
//
// Answers each sub-question by exact lookup of its text in a lexicon built
// from the original (p = 0) variants, the way a model that memorised the
// language but ignores the sheet would.

class DictionaryModel {
 public:
  explicit DictionaryModel(const lingobf::Dataset& dataset) {
    for (const auto& v : dataset.variants) {
      if (v.p != 0) continue;
      for (const auto& q : v.questions) {
        for (const auto& s : q.subquestions) lexicon_[s.text] = s.answer;
      }
    }
  }

  // Reads "<key>. <text>" lines of the final question block.
  std::map<std::string, std::string> answer(const std::string& user,
                                            const std::vector<std::string>& keys) const {
    const auto start = user.rfind(lingobf::kRespondLine);
    const auto stop = user.rfind(lingobf::kInstructions);
    const auto block = user.substr(start, stop - start);
    std::map<std::string, std::string> out;
    for (const auto& key : keys) {
      const auto marker = "\n" + key + ". ";
      const auto at = block.rfind(marker);
      std::string text;
      if (at != std::string::npos) {
        const auto begin = at + marker.size();
        text = block.substr(begin, block.find('\n', begin) - begin);
      }
      const auto it = lexicon_.find(text);
      out[key] = it == lexicon_.end() ? "unknown" : it->second;
    }
    return out;
  }

 private:
  std::map<std::string, std::string> lexicon_;
};

inline json chat_envelope(const std::string& content) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

// Chat-completion mock on 127.0.0.1. Planted prompt ids get an empty reply or
// an unparseable one; the rest are answered by the DictionaryModel, some in
// a fenced block so the parse ladder is exercised.
class MockEndpoint {
 public:
  MockEndpoint(const lingobf::Dataset& dataset, const std::vector<lingobf::PromptInstance>& prompts,
               std::set<std::string> empty_ids, std::set<std::string> bad_ids)
      : model_(dataset), empty_(std::move(empty_ids)), bad_(std::move(bad_ids)) {
    for (const auto& p : prompts) by_user_[p.user_message] = p;
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const auto body = json::parse(req.body);
      std::string user;
      for (const auto& m : body.at("messages")) {
        if (m.at("role") == "user") user = m.at("content").get<std::string>();
      }
      const auto it = by_user_.find(user);
      if (it == by_user_.end()) {
        res.status = 400;
        return;
      }
      ++requests_;
      const auto& prompt = it->second;
      std::string content;
      if (empty_.contains(prompt.prompt_id)) {
        content = "";
      } else if (bad_.contains(prompt.prompt_id)) {
        content = "I am not able to answer these questions.";
      } else {
        const json answers = model_.answer(user, prompt.expected_keys);
        content = lingobf::fnv1a64(prompt.prompt_id) % 3 == 0
                      ? "Here you go:\n```json\n" + answers.dump(2) + "\n```"
                      : answers.dump();
      }
      res.set_content(chat_envelope(content).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  std::size_t requests() const { return requests_.load(); }

 private:
  DictionaryModel model_;
  std::set<std::string> empty_;
  std::set<std::string> bad_;
  std::map<std::string, lingobf::PromptInstance> by_user_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

// Runs a command through the shell; returns its exit status.
inline int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace support
