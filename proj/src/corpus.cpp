#include "csent/corpus.hpp"

#include <algorithm>

#include <json.hpp>

#include "csent/error.hpp"
#include "csent/io.hpp"
#include "csent/unicode.hpp"

namespace csent::corpus {

using nlohmann::json;

const char* to_string(KeywordSource source) {
  return source == KeywordSource::spanish ? "spanish" : "spanglish";
}

bool KeywordList::add(std::string word, KeywordSource source) {
  if (index_.contains(word)) return false;
  index_.emplace(word, entries_.size());
  entries_.push_back({std::move(word), source});
  return true;
}

namespace {

std::unordered_set<std::string> normalized_set(const std::vector<std::string>& words,
                                               const char* source) {
  std::unordered_set<std::string> out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!unicode::is_valid_utf8(words[i])) throw ParseError(source, i + 1, "invalid UTF-8");
    out.insert(unicode::normalize_word(words[i]));
  }
  return out;
}

}  // namespace

KeywordList build_keyword_list(const std::vector<std::string>& spanish_candidates,
                               const std::vector<std::string>& spanglish_candidates,
                               const std::vector<std::string>& portuguese_dict,
                               const std::vector<std::string>& proper_nouns) {
  const auto portuguese = normalized_set(portuguese_dict, "portuguese dictionary");
  const auto names = normalized_set(proper_nouns, "proper nouns");

  KeywordList list;
  auto consider = [&](const std::vector<std::string>& words, KeywordSource source,
                      const char* label) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!unicode::is_valid_utf8(words[i])) throw ParseError(label, i + 1, "invalid UTF-8");
      std::string word = unicode::normalize_word(io::trim(words[i]));
      if (unicode::scalar_count(word) < kMinKeywordLength) continue;
      if (names.contains(word)) continue;
      if (source == KeywordSource::spanish && portuguese.contains(word)) continue;
      list.add(std::move(word), source);
    }
  };
  consider(spanish_candidates, KeywordSource::spanish, "spanish candidates");
  consider(spanglish_candidates, KeywordSource::spanglish, "spanglish candidates");

  if (list.empty()) throw DataError("keyword list empty");
  return list;
}

std::optional<RawTweet> parse_tweet_line(std::string_view line, std::string& reason) {
  json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (object.is_discarded()) {
    reason = "not valid JSON";
    return std::nullopt;
  }
  if (!object.is_object()) {
    reason = "not a JSON object";
    return std::nullopt;
  }
  for (const char* key : {"id", "text", "lang"}) {
    auto it = object.find(key);
    if (it == object.end()) {
      reason = std::string("missing key '") + key + "'";
      return std::nullopt;
    }
    if (!it->is_string()) {
      reason = std::string("key '") + key + "' is not a string";
      return std::nullopt;
    }
  }
  RawTweet tweet;
  tweet.id = object["id"].get<std::string>();
  tweet.text = unicode::nfc(object["text"].get<std::string>());
  tweet.lang = object["lang"].get<std::string>();
  if (auto it = object.find("created_at"); it != object.end() && it->is_string())
    tweet.created_at = it->get<std::string>();

  if (unicode::collapse_whitespace(tweet.text).empty()) {
    reason = "empty text";
    return std::nullopt;
  }
  const bool lang_ok = tweet.lang.size() == 2 &&
                       std::all_of(tweet.lang.begin(), tweet.lang.end(),
                                   [](char c) { return c >= 'a' && c <= 'z'; });
  if (!lang_ok) {
    reason = "lang must be two lowercase ASCII letters";
    return std::nullopt;
  }
  return tweet;
}

IngestSummary ingest_jsonl(const std::filesystem::path& path,
                           const std::function<void(RawTweet&&)>& on_tweet,
                           const std::function<void(const SkipRecord&)>& on_skip) {
  IngestSummary summary;
  std::string reason;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    if (io::trim(line).empty()) return;
    ++summary.lines;
    auto tweet = parse_tweet_line(line, reason);
    if (!tweet) {
      ++summary.skipped;
      if (on_skip) on_skip(SkipRecord{number, reason});
      return;
    }
    ++summary.accepted;
    on_tweet(std::move(*tweet));
  });
  if (summary.lines > 0 &&
      static_cast<double>(summary.skipped) > kMaxMalformedFraction * static_cast<double>(summary.lines)) {
    throw DataError(path.string() + ": " + std::to_string(summary.skipped) + " of " +
                    std::to_string(summary.lines) +
                    " lines malformed; is this a tweet JSONL file?");
  }
  return summary;
}

std::string tweet_to_json(const RawTweet& tweet) {
  json object = {{"id", tweet.id}, {"text", tweet.text}, {"lang", tweet.lang}};
  if (!tweet.created_at.empty()) object["created_at"] = tweet.created_at;
  return object.dump();
}

std::vector<std::string> match_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t c : unicode::decode(unicode::to_lower(text))) {
    if (unicode::is_whitespace(c) || unicode::is_punctuation(c) || unicode::is_symbol(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      unicode::append_utf8(current, c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

CodeSwitchFilter::CodeSwitchFilter(const KeywordList& keywords) : keywords_(keywords) {
  if (keywords_.empty()) throw DataError("keyword list empty");
}

std::vector<std::string> CodeSwitchFilter::keyword_hits(std::string_view text) const {
  std::vector<std::string> hits;
  for (auto& token : match_tokens(unicode::nfc(text)))
    if (keywords_.contains(token)) hits.push_back(std::move(token));
  return hits;
}

bool CodeSwitchFilter::accept(const RawTweet& tweet) {
  if (tweet.lang != "en") return false;
  if (keyword_hits(tweet.text).empty()) return false;
  return seen_.insert(unicode::collapse_whitespace(unicode::to_lower(tweet.text))).second;
}

std::vector<RawTweet> filter_code_switched(const std::vector<RawTweet>& tweets,
                                           const KeywordList& keywords) {
  CodeSwitchFilter filter(keywords);
  std::vector<RawTweet> kept;
  for (const auto& tweet : tweets)
    if (filter.accept(tweet)) kept.push_back(tweet);
  return kept;
}

}  // namespace csent::corpus
