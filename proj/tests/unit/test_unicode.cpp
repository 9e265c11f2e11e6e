#include "doctest.h"
#include "lingobf/answer.hpp"
#include "lingobf/digest.hpp"
#include "lingobf/unicode.hpp"

using namespace lingobf;

TEST_SUITE("unicode") {
  TEST_CASE("nfc composes combining sequences") {
    const std::string decomposed = "o\xCC\x88";  // o + combining diaeresis
    CHECK(unicode::nfc(decomposed) == "ö");
    CHECK_FALSE(unicode::is_nfc(decomposed));
    CHECK(unicode::is_nfc("ö"));
  }

  TEST_CASE("decode reports byte spans and invalid bytes") {
    const auto spans = unicode::decode("aö\xFF" "b");
    REQUIRE(spans.size() == 4);
    CHECK(spans[1].cp == U'ö');
    CHECK(spans[1].offset == 1);
    CHECK(spans[1].length == 2);
    CHECK_FALSE(spans[2].valid);
    CHECK(spans[2].length == 1);
    CHECK(spans[3].offset == 4);
  }

  TEST_CASE("encode round trips through decode") {
    for (const char32_t cp : {U'a', U'ɬ', U'€', U'\U0001F600'}) {
      const auto spans = unicode::decode(unicode::encode(cp));
      REQUIRE(spans.size() == 1);
      CHECK(spans[0].cp == cp);
    }
  }

  TEST_CASE("simple case folding keeps codepoint alignment") {
    CHECK(unicode::fold("ÖZEL") == "özel");
    CHECK(unicode::codepoint_count(unicode::fold("STRASSE")) == 7);
    CHECK(unicode::fold(U'ı') == U'ı');
    CHECK(unicode::is_upper(U'K'));
    CHECK_FALSE(unicode::is_upper(U'k'));
    CHECK_FALSE(unicode::has_case(U'ʰ'));
  }

  TEST_CASE("character classes") {
    CHECK(unicode::is_whitespace(U' '));
    CHECK(unicode::is_digit(U'7'));
    CHECK(unicode::is_ascii_punct(U','));
    CHECK_FALSE(unicode::is_ascii_punct(U'«'));
  }

  TEST_CASE("collapse_whitespace trims and collapses") {
    CHECK(unicode::collapse_whitespace("  a \t\n b  ") == "a b");
    CHECK(unicode::collapse_whitespace("") == "");
  }

  TEST_CASE("sha256 of the empty string") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("exact match normalization") {
    CHECK(exact_match("kahmanama", "kahmanama") == 1);
    CHECK(exact_match("kahmana", "kahmanama") == 0);
    CHECK(exact_match("  42 ", "42") == 1);
    CHECK(exact_match("the   big\tdog", "the big dog") == 1);
    CHECK(exact_match("o\xCC\x88", "ö") == 1);
    CHECK(exact_match("", "a") == 0);
  }

  TEST_CASE("exact match is case sensitive unless toggled") {
    CHECK(exact_match("Cats", "cats") == 0);
    CHECK(exact_match("Cats", "cats", {}, {.case_sensitive = false}) == 1);
  }

  TEST_CASE("alternates are accepted") {
    const std::vector<std::string> alts = {"daughters"};
    CHECK(exact_match("daughters", "girls", alts) == 1);
    CHECK(exact_match("sons", "girls", alts) == 0);
  }

  TEST_CASE("answer types") {
    CHECK(answer_type("42") == AnswerType::Digit);
    CHECK(answer_type(" 7 ") == AnswerType::Digit);
    CHECK(answer_type("a") == AnswerType::SingleChar);
    CHECK(answer_type("ʃ") == AnswerType::SingleChar);
    CHECK(answer_type("y") == AnswerType::SingleChar);
    CHECK(answer_type("Yes") == AnswerType::YesNo);
    CHECK(answer_type("no") == AnswerType::YesNo);
    CHECK(answer_type("kahmanama") == AnswerType::Other);
    CHECK(answer_type("4a") == AnswerType::Other);
    CHECK(to_string(AnswerType::YesNo) == "YN");
  }
}
