// Synthetic corpora for tests and demos. Output is a pure function of the
// arguments, so the shipped files under data/fixtures can be regenerated.
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csent/io.hpp"
#include "csent/labels.hpp"
#include "csent/random.hpp"

namespace {

using csent::Rng;

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

// Tokens A and B fill the same slot of the same frames; the other 48 words
// are either frame context or filler that never touches the slot.
void ab_corpus(std::ostream& out, std::uint64_t seed, int frames_per_token) {
  Rng rng(seed);
  std::vector<std::string> fillers;
  for (int i = 0; i < 48; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "w%02d", i);
    fillers.emplace_back(buf);
  }
  constexpr int kFrames = 4;
  constexpr int kSide = 4;
  std::vector<std::vector<std::string>> frames;
  for (int f = 0; f < kFrames; ++f) {
    std::vector<std::string> frame;
    for (int k = 0; k < 2 * kSide; ++k) frame.push_back(fillers[f * 2 * kSide + k]);
    frames.push_back(frame);
  }
  const std::vector<std::string> ring(fillers.begin() + kFrames * 2 * kSide, fillers.end());

  int id = 0;
  auto emit = [&](const std::vector<std::string>& tokens) {
    nlohmann::json j = {{"id", "ab" + std::to_string(id++)}, {"tokens", tokens}};
    out << j.dump() << '\n';
  };
  const int frame_sentences = 2 * frames_per_token;
  for (int s = 0; s < frame_sentences; ++s) {
    const auto& frame = frames[rng.below(frames.size())];
    std::vector<std::string> tokens(frame.begin(), frame.begin() + kSide);
    tokens.push_back(s % 2 == 0 ? "A" : "B");
    tokens.insert(tokens.end(), frame.begin() + kSide, frame.end());
    emit(tokens);
    // Interleave a filler sentence so frame words also see varied contexts.
    if (s % 2 == 1) {
      std::vector<std::string> filler;
      const std::size_t start = rng.below(ring.size());
      for (std::size_t k = 0; k < 8; ++k) filler.push_back(ring[(start + k) % ring.size()]);
      emit(filler);
    }
  }
}

struct Lexicon {
  std::vector<std::string> positive{"love", "great", "happy", "amazing", "feliz", "chingón", "gracias", "best"};
  std::vector<std::string> negative{"hate", "terrible", "sad", "awful", "triste", "cansado", "worst", "angry"};
  std::vector<std::string> neutral{"going", "store", "today", "bus", "meeting", "weather", "train", "class"};
  std::vector<std::string> spanish{"mañana", "trabajo", "fiesta", "comida", "hermano", "abuela", "playa", "calor",
                                   "dinero", "cerveza", "noche", "amigo"};
  std::vector<std::string> spanglish{"janguear", "parquear", "lonche", "troca", "chequear", "textear"};
  std::vector<std::string> english{"the", "my", "with", "after", "before", "again", "this", "at", "for", "we"};
  std::vector<std::string> emoji_pos{"😍", "😂", "🎉", "❤️", "👍🏽"};
  std::vector<std::string> emoji_neg{"😡", "😢", "💔", "😤"};
};

std::string sentence(Rng& rng, const Lexicon& lex, csent::SentimentLabel label) {
  std::vector<std::string> words;
  const std::size_t n = 4 + rng.below(5);
  for (std::size_t i = 0; i < n; ++i) words.push_back(pick(rng, lex.english));
  words[rng.below(words.size())] = pick(rng, rng.below(3) == 0 ? lex.spanglish : lex.spanish);
  const std::vector<std::string>* bag = &lex.neutral;
  if (label == csent::SentimentLabel::positive) bag = &lex.positive;
  if (label == csent::SentimentLabel::negative) bag = &lex.negative;
  words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), pick(rng, *bag));
  if (label != csent::SentimentLabel::neutral && rng.below(2) == 0)
    words.push_back(pick(rng, label == csent::SentimentLabel::positive ? lex.emoji_pos : lex.emoji_neg));
  std::string text;
  for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

void labeled(std::ostream& out, std::uint64_t seed, int count, const std::string& prefix) {
  Rng rng(seed);
  const Lexicon lex;
  out << "id\tlabel\ttext\n";
  for (int i = 0; i < count; ++i) {
    const auto label = static_cast<csent::SentimentLabel>(i % csent::kNumClasses);
    out << prefix << i << '\t' << csent::to_string(label) << '\t' << sentence(rng, lex, label) << '\n';
  }
}

// Twenty-word vocabulary: six cue words per polar class, eight shared words.
// Neutral examples carry no cue word.
void overfit(std::ostream& out, std::uint64_t seed, int count) {
  Rng rng(seed);
  const std::vector<std::string> pos{"love", "great", "feliz", "chingón", "amazing", "happy"};
  const std::vector<std::string> neg{"hate", "awful", "triste", "cansado", "worst", "angry"};
  const std::vector<std::string> shared{"fiesta", "trabajo", "lonche", "troca", "playa", "comida", "janguear", "mañana"};
  out << "id\tlabel\ttext\n";
  for (int i = 0; i < count; ++i) {
    const auto label = static_cast<csent::SentimentLabel>(i % csent::kNumClasses);
    std::vector<std::string> words;
    const std::size_t n = 2 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k) words.push_back(pick(rng, shared));
    if (label != csent::SentimentLabel::neutral) {
      const auto& cues = label == csent::SentimentLabel::positive ? pos : neg;
      words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), pick(rng, cues));
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    out << "o" << i << '\t' << csent::to_string(label) << '\t' << text << '\n';
  }
}

// Raw tweet dump: mostly English code-switched text, plus Spanish-tagged
// tweets, monolingual English, near-duplicates and a few broken lines.
void tweets(std::ostream& out, std::uint64_t seed, int count) {
  Rng rng(seed);
  const Lexicon lex;
  const std::vector<std::string> plain{"heading to work now", "this traffic is unreal", "who is watching the game",
                                       "coffee first then emails", "cannot believe it is monday"};
  const std::vector<std::string> extras{"#lunes", "@primo", "https://t.co/x1Yz", "lol", "!!", "2day"};
  std::string previous;
  for (int i = 0; i < count; ++i) {
    const std::string id = std::to_string(1000000 + i);
    const std::uint64_t kind = rng.below(20);
    if (kind == 0) {
      out << "{\"id\": \"" << id << "\", \"text\": \"unterminated\n";
      continue;
    }
    std::string text;
    std::string lang = "en";
    if (kind <= 2) {
      text = pick(rng, plain);
    } else if (kind == 3) {
      lang = "es";
      text = "Qué " + pick(rng, lex.spanish) + " tan bonito hoy";
    } else if (kind == 4 && !previous.empty()) {
      text = "  " + previous + " ";
      for (auto& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else {
      const auto label = static_cast<csent::SentimentLabel>(rng.below(csent::kNumClasses));
      text = sentence(rng, lex, label);
      if (rng.below(3) == 0) text += " " + pick(rng, extras);
      previous = text;
    }
    nlohmann::json j = {{"id", id}, {"text", text}, {"lang", lang}, {"created_at", "2019-05-0" + std::to_string(1 + i % 9)}};
    out << j.dump(-1, ' ', false) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic fixture generator", "csent-fixtures"};
  app.require_subcommand(1);
  std::string output;
  std::uint64_t seed = 7;
  int count = 0;
  std::string prefix = "t";
  app.add_option("--output", output, "output file (default: stdout)");
  app.add_option("--seed", seed, "generator seed");
  app.fallthrough();

  auto* ab = app.add_subcommand("ab-corpus", "token JSONL where A and B share every context");
  int frames = 1000;
  ab->add_option("--per-token", frames, "frame sentences per token");
  auto* lab = app.add_subcommand("labeled", "labeled TSV id<TAB>label<TAB>text");
  lab->add_option("--count", count, "examples")->required();
  lab->add_option("--prefix", prefix, "id prefix");
  auto* of = app.add_subcommand("overfit", "small labeled TSV over a 20-word vocabulary");
  of->add_option("--count", count, "examples")->required();
  auto* tw = app.add_subcommand("tweets", "raw tweet JSONL");
  tw->add_option("--count", count, "lines")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<csent::io::AtomicFile> file;
    if (!output.empty()) file.emplace(output);
    std::ostream& out = file ? file->stream() : std::cout;
    if (ab->parsed()) ab_corpus(out, seed, frames);
    else if (lab->parsed()) labeled(out, seed, count, prefix);
    else if (of->parsed()) overfit(out, seed, count);
    else if (tw->parsed()) tweets(out, seed, count);
    if (file) file->commit();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
