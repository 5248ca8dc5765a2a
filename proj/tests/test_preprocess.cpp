#include <doctest.h>

#include <algorithm>

#include "csent/error.hpp"
#include "csent/io.hpp"
#include "csent/preprocess.hpp"
#include "csent/unicode.hpp"
#include "oracles.hpp"

using namespace csent;
using namespace csent::preprocess;

namespace {

std::vector<Token> toks(std::initializer_list<std::pair<TokenKind, const char*>> list) {
  std::vector<Token> out;
  for (auto [k, t] : list) out.push_back({t, k});
  return out;
}

std::string join(const std::vector<Token>& tokens) {
  std::string s;
  for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t.text;
  return s;
}

std::size_t emoji_count(const std::vector<Token>& tokens) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.kind == TokenKind::emoji; }));
}

const PreprocessConfig& builtin() {
  static const PreprocessConfig config = PreprocessConfig::builtin();
  return config;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("tokenize examples") {
    using K = TokenKind;
    CHECK(tokenize("¡Hola!! 😂") == toks({{K::word, "hola"}, {K::emoji, "😂"}}));
    CHECK(tokenize("can't wait") == toks({{K::word, "can't"}, {K::word, "wait"}}));
    CHECK(tokenize("see https://t.co/x #fun") ==
          toks({{K::word, "see"}, {K::url, "https://t.co/x"}, {K::hashtag, "#fun"}}));
    CHECK(tokenize("").empty());
    CHECK(tokenize(" \t\n ").empty());
  }

  TEST_CASE("tokenize tweet features") {
    using K = TokenKind;
    CHECK(tokenize("@Primo, ¿qué onda?") == toks({{K::mention, "@primo"}, {K::word, "qué"}, {K::word, "onda"}}));
    CHECK(tokenize("#LunesDeCalor") == toks({{K::hashtag, "#lunesdecalor"}}));
    CHECK(tokenize("http://x.co/a).") == toks({{K::url, "http://x.co/a"}}));
    CHECK(tokenize("tengo 2 tacos") == toks({{K::word, "tengo"}, {K::number, "2"}, {K::word, "tacos"}}));
    CHECK(tokenize("I’m") == toks({{K::word, "i'm"}}));
  }

  TEST_CASE("emoji sequences stay whole") {
    using K = TokenKind;
    // skin tone, ZWJ family, flag, keycap-free heart with VS16
    CHECK(tokenize("👍🏽") == toks({{K::emoji, "👍🏽"}}));
    CHECK(tokenize("👨‍👩‍👧") == toks({{K::emoji, "👨‍👩‍👧"}}));
    CHECK(tokenize("🇲🇽🇺🇸") == toks({{K::emoji, "🇲🇽"}, {K::emoji, "🇺🇸"}}));
    CHECK(tokenize("❤️") == toks({{K::emoji, "❤️"}}));
    CHECK(tokenize("calor😂😂") == toks({{K::word, "calor"}, {K::emoji, "😂"}, {K::emoji, "😂"}}));
  }

  TEST_CASE("classify_token agrees with tokenize") {
    for (const char* text : {"hola", "😂", "#fun", "@primo", "https://t.co/x", "42", "can't"}) {
      const auto t = tokenize(text);
      REQUIRE(t.size() == 1);
      CHECK(classify_token(t[0].text) == t[0].kind);
    }
  }

  TEST_CASE("contractions") {
    const auto& table = builtin().contractions();
    using K = TokenKind;
    CHECK(expand_contractions(toks({{K::word, "can't"}}), table) == toks({{K::word, "cannot"}}));
    CHECK(expand_contractions(toks({{K::word, "don't"}}), table) == toks({{K::word, "do"}, {K::word, "not"}}));
    CHECK(expand_contractions(toks({{K::word, "hola"}}), table) == toks({{K::word, "hola"}}));
    // only word tokens are looked up
    CHECK(expand_contractions(toks({{K::hashtag, "#can't"}}), table) == toks({{K::hashtag, "#can't"}}));
  }

  TEST_CASE("stopword and punctuation removal") {
    const auto& c = builtin();
    using K = TokenKind;
    CHECK(remove_stopwords_and_punct(toks({{K::word, "the"}, {K::word, "calor"}}), c.en_stopwords(),
                                     c.es_stopwords()) == toks({{K::word, "calor"}}));
    CHECK(remove_stopwords_and_punct(toks({{K::emoji, "😂"}}), c.en_stopwords(), c.es_stopwords()) ==
          toks({{K::emoji, "😂"}}));
    CHECK(remove_stopwords_and_punct(toks({{K::word, "¿?"}, {K::word, "«»"}, {K::word, "..."}}), c.en_stopwords(),
                                     c.es_stopwords())
              .empty());
    CHECK(is_punctuation_only("¡¿!?"));
    CHECK_FALSE(is_punctuation_only("a!"));
    CHECK_FALSE(is_punctuation_only(""));
  }

  TEST_CASE("document pipeline against the shipped lists") {
    CHECK(preprocess_text("I can't believe el calor 😂!!", builtin()) ==
          std::vector<Token>{{"cannot", TokenKind::word}, {"believe", TokenKind::word}, {"calor", TokenKind::word},
                             {"😂", TokenKind::emoji}});
    const auto empty = preprocess_document({"1", "", "en", ""}, builtin());
    CHECK(empty.flagged_empty());
    CHECK(empty.source_id == "1");
    CHECK(preprocess_document({"2", "the la el", "en", ""}, builtin()).flagged_empty());
    CHECK(document_to_json(empty) == R"({"id":"1","tokens":[],"empty":true})");
  }

  TEST_CASE("golden tokenizer corpus") {
    // text<TAB>kind:token ...<TAB>preprocessed tokens; first line is a header
    const auto lines = io::read_lines(testing::data_path("golden/tokenize_cases.tsv"));
    REQUIRE(lines.size() == 101);
    for (std::size_t n = 1; n < lines.size(); ++n) {
      const auto cols = io::split(lines[n], '\t');
      REQUIRE(cols.size() == 3);
      const std::string text(cols[0]);
      CAPTURE(text);
      std::string kinds;
      for (const auto& t : tokenize(unicode::nfc(text)))
        kinds += (kinds.empty() ? "" : " ") + std::string(to_string(t.kind)) + ":" + t.text;
      CHECK(kinds == cols[1]);
      CHECK(join(preprocess_text(text, builtin())) == cols[2]);
    }
  }

  TEST_CASE("properties over the sample corpus") {
    const auto& c = builtin();
    std::size_t checked = 0;
    corpus::ingest_jsonl(testing::data_path("fixtures/tweets_sample.jsonl"), [&](corpus::RawTweet&& t) {
      const auto raw = tokenize(unicode::nfc(t.text));
      const auto out = preprocess_text(t.text, c);
      CAPTURE(t.text);
      // idempotent on the joined output
      CHECK(preprocess_text(join(out), c) == out);
      // emoji survive every stage
      CHECK(emoji_count(raw) == emoji_count(out));
      for (const auto& tok : out) {
        CHECK_FALSE(is_punctuation_only(tok.text));
        if (tok.kind == TokenKind::word) CHECK_FALSE(c.is_stopword(tok.text));
      }
      // byte-identical input, byte-identical output
      CHECK(preprocess_text(t.text, c) == out);
      ++checked;
    });
    CHECK(checked > 300);
  }

  TEST_CASE("resource files") {
    CHECK(parse_stopwords("# comment\nThe\n\nla\n", "x") == std::unordered_set<std::string>{"the", "la"});
    CHECK(parse_contractions("can't\tcannot\n# c\n", "x").at("can't") == "cannot");
    CHECK_THROWS_AS(parse_contractions("cant cannot\n", "x"), ParseError);
    const auto builtin_cfg = PreprocessConfig::builtin();
    const auto from_files = PreprocessConfig::from_files(testing::data_path("stopwords/en.txt"),
                                                         testing::data_path("stopwords/es.txt"),
                                                         testing::data_path("contractions.tsv"));
    CHECK(builtin_cfg.en_stopwords() == from_files.en_stopwords());
    CHECK(builtin_cfg.es_stopwords() == from_files.es_stopwords());
    CHECK(builtin_cfg.contractions() == from_files.contractions());
  }

  TEST_CASE("token JSONL round trip") {
    testing::TempDir dir;
    ProcessedDocument doc{"7", {{"calor", TokenKind::word}, {"😂", TokenKind::emoji}, {"#fun", TokenKind::hashtag}}};
    testing::write_file(dir / "d.jsonl", document_to_json(doc) + "\n");
    const auto back = read_documents(dir / "d.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].source_id == "7");
    CHECK(back[0].tokens == doc.tokens);
    testing::write_file(dir / "bad.jsonl", "{\"id\": 1}\n");
    CHECK_THROWS_AS(read_documents(dir / "bad.jsonl"), ParseError);
  }
}
