#include "doctest.h"
#include "lingobf/error.hpp"
#include "lingobf/prompt.hpp"
#include "support.hpp"

using namespace lingobf;

namespace {

ProblemVariant small_variant() {
  ProblemVariant v;
  v.problem_id = "toy";
  v.p = 2;
  v.preamble = "Some words.";
  v.context = "tama = man";
  v.questions.push_back({"Translate.", {{"a", "tami", "", {}}, {"b", "kula", "", {}}}});
  v.questions.push_back({"", {{"1", "How many?", "", {}}}});
  return v;
}

}  // namespace

TEST_SUITE("prompt") {
  TEST_CASE("exact layout") {
    const auto p = build_prompt(small_variant(), 1);
    CHECK(p.prompt_id == "toy/p2/q1");
    CHECK(p.variant_id == "toy/p2");
    CHECK(p.system_message == kSystemMessage);
    CHECK(p.expected_keys == std::vector<std::string>{"a", "b"});
    const std::string expected =
        std::string(kPromptHeader) +
        "\nQuestion 1\nTranslate.\na. tami\nb. kula\n\nQuestion 2\n1. How many?\n\n" +
        std::string(kRespondLine) + "\nSome words.\ntama = man\nQuestion 1\nTranslate.\na. tami\nb. kula\n\n" +
        std::string(kInstructions) + "\n{\"a\": \"\", \"b\": \"\"}\n";
    CHECK(p.user_message == expected);
  }

  TEST_CASE("no-context mode drops only the context") {
    const auto with = build_prompt(small_variant(), 2);
    const auto without = build_prompt(small_variant(), 2, {.no_context = true});
    CHECK(with.user_message.find("tama = man") != std::string::npos);
    CHECK(without.user_message.find("tama = man") == std::string::npos);
    auto expected = with.user_message;
    expected.erase(expected.find("tama = man\n"), std::string("tama = man\n").size());
    CHECK(without.user_message == expected);
  }

  TEST_CASE("guidance sits before the instructions") {
    const auto p = build_prompt(small_variant(), 1, {.guidance = std::string("Think of vowels.")});
    const auto g = p.user_message.find("Think of vowels.\n\n");
    REQUIRE(g != std::string::npos);
    CHECK(p.user_message.substr(g + 18, kInstructions.size()) == kInstructions);
    CHECK(build_prompt(small_variant(), 1).user_message.find("Think") == std::string::npos);
  }

  TEST_CASE("skeleton") {
    CHECK(json_skeleton({}) == "{}");
    CHECK(json_skeleton({"1"}) == "{\"1\": \"\"}");
    CHECK(json_skeleton({"a\"b"}) == "{\"a\\\"b\": \"\"}");
  }

  TEST_CASE("index checks") {
    try {
      build_prompt(small_variant(), 3);
      FAIL("expected index_out_of_range");
    } catch (const Error& e) {
      CHECK(e.kind() == "index_out_of_range");
    }
    CHECK_THROWS_AS(build_prompt(small_variant(), 0), Error);
  }

  TEST_CASE("build_prompts covers every question or one") {
    Dataset ds;
    ds.variants = {small_variant(), small_variant()};
    ds.variants[1].p = 3;
    CHECK(build_prompts(ds, std::nullopt).size() == 4);
    const auto only = build_prompts(ds, 2);
    REQUIRE(only.size() == 2);
    CHECK(only[1].prompt_id == "toy/p3/q2");
    CHECK_THROWS_AS(build_prompts(ds, 5), Error);
  }

  TEST_CASE("json round trip") {
    support::TempDir dir;
    Dataset ds;
    ds.variants = {small_variant()};
    const auto prompts = build_prompts(ds, std::nullopt);
    save_prompts(prompts, dir / "p.jsonl");
    const auto back = load_prompts(dir / "p.jsonl");
    REQUIRE(back.size() == prompts.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].prompt_id == prompts[i].prompt_id);
      CHECK(back[i].variant_id == prompts[i].variant_id);
      CHECK(back[i].question_index == prompts[i].question_index);
      CHECK(back[i].user_message == prompts[i].user_message);
      CHECK(back[i].expected_keys == prompts[i].expected_keys);
    }
    nlohmann::json bad = to_json(prompts[0]);
    bad["prompt_id"] = "toy/p2/qx";
    CHECK_THROWS_AS(prompt_from_json(bad), ValidationError);
    write_text_file(dir / "bad.jsonl", "{not json}\n");
    CHECK_THROWS_AS(load_prompts(dir / "bad.jsonl"), ValidationError);
  }

  TEST_CASE("fixture prompts never carry the language name") {
    const auto corpus = load_corpus(support::fixture("corpus"));
    const auto ds = build_dataset(corpus, 2, 3);
    for (const auto& p : build_prompts(ds, std::nullopt)) {
      CHECK(p.user_message.find("Turk") == std::string::npos);
      CHECK(p.user_message.find("Somali") == std::string::npos);
      CHECK(p.user_message.find("Voicingese") == std::string::npos);
      CHECK(p.user_message.find("@@@") == std::string::npos);
    }
  }
}
