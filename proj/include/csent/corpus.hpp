#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Keyword-list construction and code-switched tweet selection.
namespace csent::corpus {

struct RawTweet {
  std::string id;
  std::string text;  // NFC-normalized
  std::string lang;
  std::string created_at;
};

enum class KeywordSource { spanish, spanglish };

const char* to_string(KeywordSource source);

/// Ordered, duplicate-free set of normalized (NFC + lowercase) query words.
class KeywordList {
 public:
  struct Entry {
    std::string word;
    KeywordSource source;
  };

  KeywordList() = default;

  /// Appends if absent; returns false for duplicates.
  bool add(std::string word, KeywordSource source);

  bool contains(const std::string& normalized_word) const { return index_.contains(normalized_word); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::size_t kMinKeywordLength = 4;

/// Spanish candidates lose anything shorter than four scalars, anything in
/// the Portuguese dictionary and any proper noun. Spanglish candidates skip
/// only the Portuguese check. Comparison is on NFC-lowercased words; the
/// first occurrence of a word wins. Throws DataError("keyword list empty")
/// if nothing survives, ParseError for non-UTF-8 entries (the 1-based index
/// within its list is reported as the line).
KeywordList build_keyword_list(const std::vector<std::string>& spanish_candidates,
                               const std::vector<std::string>& spanglish_candidates,
                               const std::vector<std::string>& portuguese_dict,
                               const std::vector<std::string>& proper_nouns);

struct SkipRecord {
  std::size_t line;
  std::string reason;
};

struct IngestSummary {
  std::size_t lines = 0;      // non-blank lines seen
  std::size_t accepted = 0;
  std::size_t skipped = 0;
};

/// Fraction of malformed non-blank lines above which ingestion aborts.
inline constexpr double kMaxMalformedFraction = 0.5;

/// Streams RawTweets from a JSONL file in file order. Each line must be a
/// JSON object with string `id`, `text` and `lang` (`created_at` optional,
/// unknown keys ignored); text must be non-empty after NFC and lang must be
/// two lowercase ASCII letters. Bad lines are reported through on_skip and
/// skipped. Blank lines are ignored. Throws DataError if the file is
/// unreadable or more than half of the lines were malformed; the check runs
/// after the last line so callers must treat already-delivered tweets as
/// provisional until this returns.
IngestSummary ingest_jsonl(const std::filesystem::path& path,
                           const std::function<void(RawTweet&&)>& on_tweet,
                           const std::function<void(const SkipRecord&)>& on_skip = {});

/// Parses a single JSONL line. Returns the tweet or sets `reason`.
std::optional<RawTweet> parse_tweet_line(std::string_view line, std::string& reason);

std::string tweet_to_json(const RawTweet& tweet);

/// Lowercased text split at whitespace, punctuation and symbol characters.
std::vector<std::string> match_tokens(std::string_view text);

/// Stateful selector: keeps English-tagged tweets with at least one whole-token
/// keyword hit, dropping exact duplicates (after lowercasing and whitespace
/// collapse) of anything already kept.
class CodeSwitchFilter {
 public:
  explicit CodeSwitchFilter(const KeywordList& keywords);

  bool accept(const RawTweet& tweet);

  /// Keyword hits in the text, in order of occurrence.
  std::vector<std::string> keyword_hits(std::string_view text) const;

 private:
  const KeywordList& keywords_;
  std::unordered_set<std::string> seen_;
};

std::vector<RawTweet> filter_code_switched(const std::vector<RawTweet>& tweets,
                                           const KeywordList& keywords);

}  // namespace csent::corpus
