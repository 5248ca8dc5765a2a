#include <doctest.h>

#include "csent/unicode.hpp"

using namespace csent::unicode;

TEST_SUITE("unicode") {
  TEST_CASE("utf-8 validation") {
    CHECK(is_valid_utf8("hola 😂"));
    CHECK(is_valid_utf8(""));
    CHECK_FALSE(is_valid_utf8("\xff"));
    CHECK_FALSE(is_valid_utf8("\xc3"));          // truncated
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
  }

  TEST_CASE("nfc composes combining marks") {
    CHECK(nfc("mañana") == "mañana");
    CHECK(scalar_count(nfc("mañana")) == 6);
  }

  TEST_CASE("lowercasing is locale independent") {
    CHECK(to_lower("ÁRBOL") == "árbol");
    CHECK(to_lower("I") == "i");
    CHECK(normalize_word("Mañana") == "mañana");
  }

  TEST_CASE("decode and encode round trip") {
    const std::string s = "¿Qué? 👍🏽";
    CHECK(encode(decode(s)) == s);
    CHECK(scalar_count(s) == 8);
  }

  TEST_CASE("character classes") {
    CHECK(is_whitespace(U' '));
    CHECK(is_whitespace(U' '));
    CHECK(is_punctuation(U'¿'));
    CHECK(is_punctuation(U'¡'));
    CHECK(is_punctuation(U'«'));
    CHECK(is_punctuation(U'!'));
    CHECK_FALSE(is_punctuation(U'a'));
    CHECK(is_extended_pictographic(U'😂'));
    CHECK(is_emoji_modifier(U'\U0001F3FD'));
    CHECK(is_regional_indicator(U'\U0001F1F2'));
    CHECK(is_emoji_scalar(kZeroWidthJoiner));
    CHECK_FALSE(is_emoji_scalar(U'a'));
  }

  TEST_CASE("whitespace helpers") {
    CHECK(collapse_whitespace("  a \t b\n") == "a b");
    CHECK(split_whitespace(" a b  c ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_whitespace("   ").empty());
  }
}
