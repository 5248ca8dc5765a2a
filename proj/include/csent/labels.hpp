#pragma once

#include <optional>
#include <string_view>

namespace csent {

enum class SentimentLabel : int { positive = 0, neutral = 1, negative = 2 };
inline constexpr int kNumClasses = 3;

const char* to_string(SentimentLabel label);
/// Case-insensitive; surrounding whitespace ignored.
std::optional<SentimentLabel> parse_label(std::string_view text);

}  // namespace csent

namespace csent::classifier {
using csent::kNumClasses;
using csent::parse_label;
using csent::SentimentLabel;
using csent::to_string;
}  // namespace csent::classifier
