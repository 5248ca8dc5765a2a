#include "csent/preprocess.hpp"

#include <algorithm>

#include <json.hpp>

#include "csent/error.hpp"
#include "csent/io.hpp"
#include "csent/resources.hpp"
#include "csent/unicode.hpp"

namespace csent::preprocess {

using nlohmann::json;
namespace uc = csent::unicode;

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::emoji: return "emoji";
    case TokenKind::hashtag: return "hashtag";
    case TokenKind::mention: return "mention";
    case TokenKind::url: return "url";
    case TokenKind::number: return "number";
  }
  return "word";
}

std::vector<std::string> ProcessedDocument::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

PreprocessConfig::PreprocessConfig(std::unordered_set<std::string> en_stopwords,
                                   std::unordered_set<std::string> es_stopwords,
                                   std::unordered_map<std::string, std::string> contractions)
    : en_(std::move(en_stopwords)), es_(std::move(es_stopwords)), contractions_(std::move(contractions)) {}

std::unordered_set<std::string> parse_stopwords(std::string_view content, const std::string& source) {
  std::unordered_set<std::string> words;
  for (auto& w : io::parse_word_list(content, source)) words.insert(uc::normalize_word(w));
  return words;
}

std::unordered_map<std::string, std::string> parse_contractions(std::string_view content,
                                                                const std::string& source) {
  std::unordered_map<std::string, std::string> table;
  std::size_t number = 0;
  for (std::string_view raw : io::split(content, '\n')) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (io::trim(raw).empty() || io::trim(raw).front() == '#') continue;
    if (!uc::is_valid_utf8(raw)) throw ParseError(source, number, "invalid UTF-8");
    const auto fields = io::split(raw, '\t');
    if (fields.size() != 2 || io::trim(fields[0]).empty() || io::trim(fields[1]).empty())
      throw ParseError(source, number, "expected 'contraction<TAB>expansion'");
    table[uc::normalize_word(io::trim(fields[0]))] = uc::normalize_word(io::trim(fields[1]));
  }
  return table;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::string content;
  for (const auto& line : io::read_lines(path)) content += line + "\n";
  return content;
}

}  // namespace

PreprocessConfig PreprocessConfig::builtin() {
  return PreprocessConfig(parse_stopwords(resources::english_stopwords, "builtin:en_stopwords"),
                          parse_stopwords(resources::spanish_stopwords, "builtin:es_stopwords"),
                          parse_contractions(resources::contraction_table, "builtin:contractions"));
}

PreprocessConfig PreprocessConfig::from_files(const std::filesystem::path& en_stopwords,
                                              const std::filesystem::path& es_stopwords,
                                              const std::filesystem::path& contractions) {
  auto en = en_stopwords.empty()
                ? parse_stopwords(resources::english_stopwords, "builtin:en_stopwords")
                : parse_stopwords(read_file(en_stopwords), en_stopwords.string());
  auto es = es_stopwords.empty()
                ? parse_stopwords(resources::spanish_stopwords, "builtin:es_stopwords")
                : parse_stopwords(read_file(es_stopwords), es_stopwords.string());
  auto table = contractions.empty()
                   ? parse_contractions(resources::contraction_table, "builtin:contractions")
                   : parse_contractions(read_file(contractions), contractions.string());
  return PreprocessConfig(std::move(en), std::move(es), std::move(table));
}

// ---------------------------------------------------------------------------
// tokenizer

namespace {

bool starts_with_url_scheme(std::string_view chunk) {
  auto lower_prefix = [&](std::string_view prefix) {
    if (chunk.size() <= prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(chunk[i])) != prefix[i]) return false;
    return true;
  };
  return lower_prefix("http://") || lower_prefix("https://");
}

bool is_strippable(char32_t c) { return uc::is_punctuation(c); }

bool is_emoji_base(char32_t c) {
  return uc::is_extended_pictographic(c) || uc::is_regional_indicator(c);
}

// Splits a run of emoji-property scalars into user-perceived emoji.
void split_emoji_run(std::u32string_view run, std::vector<Token>& out) {
  std::u32string cluster;
  bool after_zwj = false;
  int regional_in_cluster = 0;
  auto flush = [&] {
    if (!cluster.empty()) out.push_back({uc::encode(cluster), TokenKind::emoji});
    cluster.clear();
    after_zwj = false;
    regional_in_cluster = 0;
  };
  for (char32_t c : run) {
    if (uc::is_regional_indicator(c)) {
      // Flags are pairs of regional indicators.
      if (regional_in_cluster != 1) flush();
      cluster.push_back(c);
      ++regional_in_cluster;
      continue;
    }
    if (is_emoji_base(c) && !after_zwj) flush();
    cluster.push_back(c);
    after_zwj = (c == uc::kZeroWidthJoiner);
  }
  flush();
}

bool is_number_text(std::u32string_view s) {
  bool digit = false;
  for (char32_t c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != ':' && c != '/') {
      return false;
    }
  }
  return digit;
}

void emit_text_segment(std::u32string segment, std::vector<Token>& out) {
  if (segment.empty()) return;
  for (char32_t& c : segment)
    if (c == 0x2019 || c == 0x02BC) c = U'\'';

  std::size_t end = segment.size();
  while (end > 0 && is_strippable(segment[end - 1])) --end;
  std::size_t begin = 0;
  while (begin < end && is_strippable(segment[begin])) ++begin;
  if (begin >= end) {
    out.push_back({uc::encode(segment), TokenKind::word});
    return;
  }
  if (begin > 0 && (segment[begin - 1] == U'#' || segment[begin - 1] == U'@')) --begin;

  const std::u32string_view core(segment.data() + begin, end - begin);
  std::string text = uc::to_lower(uc::encode(core));
  TokenKind kind = TokenKind::word;
  if (core.front() == U'#') {
    kind = TokenKind::hashtag;
  } else if (core.front() == U'@') {
    kind = TokenKind::mention;
  } else if (is_number_text(core)) {
    kind = TokenKind::number;
  }
  out.push_back({std::move(text), kind});
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  for (const std::string& chunk : uc::split_whitespace(text)) {
    if (starts_with_url_scheme(chunk)) {
      std::u32string url = uc::decode(chunk);
      while (url.size() > 1 && url.back() != U'/' && is_strippable(url.back())) url.pop_back();
      tokens.push_back({uc::encode(url), TokenKind::url});
      continue;
    }
    const std::u32string scalars = uc::decode(chunk);
    std::size_t i = 0;
    while (i < scalars.size()) {
      const bool emoji = uc::is_emoji_scalar(scalars[i]);
      std::size_t j = i;
      while (j < scalars.size() && uc::is_emoji_scalar(scalars[j]) == emoji) ++j;
      const std::u32string_view run(scalars.data() + i, j - i);
      if (emoji) {
        split_emoji_run(run, tokens);
      } else {
        emit_text_segment(std::u32string(run), tokens);
      }
      i = j;
    }
  }
  return tokens;
}

TokenKind classify_token(std::string_view text) {
  if (text.empty()) return TokenKind::word;
  if (starts_with_url_scheme(text)) return TokenKind::url;
  const std::u32string scalars = uc::decode(text);
  if (std::all_of(scalars.begin(), scalars.end(), uc::is_emoji_scalar)) return TokenKind::emoji;
  if (scalars.size() > 1 && scalars.front() == U'#') return TokenKind::hashtag;
  if (scalars.size() > 1 && scalars.front() == U'@') return TokenKind::mention;
  if (is_number_text(scalars)) return TokenKind::number;
  return TokenKind::word;
}

std::vector<Token> expand_contractions(const std::vector<Token>& tokens,
                                       const std::unordered_map<std::string, std::string>& table) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto it = token.kind == TokenKind::word ? table.find(token.text) : table.end();
    if (it == table.end()) {
      out.push_back(token);
      continue;
    }
    for (auto& part : uc::split_whitespace(it->second)) out.push_back({std::move(part), TokenKind::word});
  }
  return out;
}

bool is_punctuation_only(std::string_view text) {
  const std::u32string scalars = uc::decode(text);
  return !scalars.empty() && std::all_of(scalars.begin(), scalars.end(), [](char32_t c) {
    return uc::is_punctuation(c) || (uc::is_symbol(c) && !uc::is_emoji_scalar(c));
  });
}

std::vector<Token> remove_stopwords_and_punct(const std::vector<Token>& tokens,
                                              const std::unordered_set<std::string>& en_stopwords,
                                              const std::unordered_set<std::string>& es_stopwords) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (token.kind == TokenKind::emoji) {
      out.push_back(token);
      continue;
    }
    if (token.text.empty() || is_punctuation_only(token.text)) continue;
    if (token.kind == TokenKind::word &&
        (en_stopwords.contains(token.text) || es_stopwords.contains(token.text)))
      continue;
    out.push_back(token);
  }
  return out;
}

std::vector<Token> preprocess_text(std::string_view text, const PreprocessConfig& config) {
  return remove_stopwords_and_punct(
      expand_contractions(tokenize(uc::nfc(text)), config.contractions()),
      config.en_stopwords(), config.es_stopwords());
}

ProcessedDocument preprocess_document(const corpus::RawTweet& tweet, const PreprocessConfig& config) {
  return ProcessedDocument{tweet.id, preprocess_text(tweet.text, config)};
}

std::string document_to_json(const ProcessedDocument& doc) {
  nlohmann::ordered_json object = {{"id", doc.source_id}, {"tokens", doc.texts()}};
  if (doc.flagged_empty()) object["empty"] = true;
  return object.dump();
}

std::vector<ProcessedDocument> read_documents(const std::filesystem::path& path) {
  std::vector<ProcessedDocument> docs;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    if (io::trim(line).empty()) return;
    json object = json::parse(line, nullptr, false);
    if (object.is_discarded() || !object.is_object())
      throw ParseError(path.string(), number, "not a JSON object");
    auto tokens = object.find("tokens");
    if (tokens == object.end() || !tokens->is_array())
      throw ParseError(path.string(), number, "missing 'tokens' array");
    ProcessedDocument doc;
    if (auto id = object.find("id"); id != object.end() && id->is_string()) doc.source_id = id->get<std::string>();
    for (const auto& t : *tokens) {
      if (!t.is_string()) throw ParseError(path.string(), number, "token is not a string");
      std::string text = t.get<std::string>();
      if (text.empty()) continue;
      const TokenKind kind = classify_token(text);
      doc.tokens.push_back({std::move(text), kind});
    }
    docs.push_back(std::move(doc));
  });
  return docs;
}

}  // namespace csent::preprocess
