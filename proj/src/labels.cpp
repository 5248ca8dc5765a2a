#include "csent/labels.hpp"

#include <string>

#include "csent/io.hpp"
#include "csent/unicode.hpp"

namespace csent {

const char* to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::positive: return "positive";
    case SentimentLabel::neutral: return "neutral";
    case SentimentLabel::negative: return "negative";
  }
  return "neutral";
}

std::optional<SentimentLabel> parse_label(std::string_view text) {
  const std::string lower = unicode::to_lower(io::trim(text));
  if (lower == "positive") return SentimentLabel::positive;
  if (lower == "neutral") return SentimentLabel::neutral;
  if (lower == "negative") return SentimentLabel::negative;
  return std::nullopt;
}

}  // namespace csent
