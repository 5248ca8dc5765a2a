#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "csent/corpus.hpp"

// Tweet text -> token sequences for embedding training and classification.
namespace csent::preprocess {

enum class TokenKind { word, emoji, hashtag, mention, url, number };

const char* to_string(TokenKind kind);

struct Token {
  std::string text;
  TokenKind kind = TokenKind::word;

  friend bool operator==(const Token&, const Token&) = default;
};

struct ProcessedDocument {
  std::string source_id;
  std::vector<Token> tokens;

  /// Documents whose every token was removed are kept but flagged.
  bool flagged_empty() const { return tokens.empty(); }
  std::vector<std::string> texts() const;
};

/// Stopword sets and contraction table. Immutable once built.
class PreprocessConfig {
 public:
  PreprocessConfig(std::unordered_set<std::string> en_stopwords,
                   std::unordered_set<std::string> es_stopwords,
                   std::unordered_map<std::string, std::string> contractions);

  /// The snapshots compiled into the library (data/stopwords, data/contractions.tsv).
  static PreprocessConfig builtin();

  /// Any path left empty falls back to the builtin resource.
  static PreprocessConfig from_files(const std::filesystem::path& en_stopwords,
                                     const std::filesystem::path& es_stopwords,
                                     const std::filesystem::path& contractions);

  const std::unordered_set<std::string>& en_stopwords() const { return en_; }
  const std::unordered_set<std::string>& es_stopwords() const { return es_; }
  const std::unordered_map<std::string, std::string>& contractions() const { return contractions_; }

  bool is_stopword(const std::string& word) const { return en_.contains(word) || es_.contains(word); }

 private:
  std::unordered_set<std::string> en_;
  std::unordered_set<std::string> es_;
  std::unordered_map<std::string, std::string> contractions_;
};

std::unordered_set<std::string> parse_stopwords(std::string_view content, const std::string& source);
/// TSV `contraction<TAB>expansion`; '#' comment lines and blank lines skipped.
std::unordered_map<std::string, std::string> parse_contractions(std::string_view content,
                                                                const std::string& source);

/// Whitespace tokenizer with tweet-aware rules:
///  - emoji (ZWJ sequences, skin tones, flags) stay whole and split off
///    adjacent text;
///  - http(s) URLs, @mentions and #hashtags keep their kind;
///  - word tokens lose leading/trailing punctuation and are lowercased;
///    internal apostrophes survive (typographic apostrophes become ');
///  - chunks made only of punctuation are returned as-is for the removal
///    stage to drop.
std::vector<Token> tokenize(std::string_view text);

/// Kind a bare token string would get from tokenize() (used when reloading
/// token lists from JSONL).
TokenKind classify_token(std::string_view text);

std::vector<Token> expand_contractions(const std::vector<Token>& tokens,
                                       const std::unordered_map<std::string, std::string>& table);

bool is_punctuation_only(std::string_view text);

std::vector<Token> remove_stopwords_and_punct(const std::vector<Token>& tokens,
                                              const std::unordered_set<std::string>& en_stopwords,
                                              const std::unordered_set<std::string>& es_stopwords);

/// tokenize -> expand_contractions -> remove_stopwords_and_punct on the
/// NFC-normalized text.
std::vector<Token> preprocess_text(std::string_view text, const PreprocessConfig& config);

ProcessedDocument preprocess_document(const corpus::RawTweet& tweet, const PreprocessConfig& config);

/// `{"id": ..., "tokens": [...]}` plus `"empty": true` for flagged documents.
std::string document_to_json(const ProcessedDocument& doc);

/// Reads the JSONL written by document_to_json. Throws ParseError on a bad line.
std::vector<ProcessedDocument> read_documents(const std::filesystem::path& path);

}  // namespace csent::preprocess
