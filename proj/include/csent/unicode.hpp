#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Thin wrappers over ICU for the handful of Unicode operations the pipeline
// needs. All strings are UTF-8.
namespace csent::unicode {

bool is_valid_utf8(std::string_view s);

/// NFC normalization. Invalid sequences become U+FFFD.
std::string nfc(std::string_view s);

/// Full (locale-independent) lowercase mapping.
std::string to_lower(std::string_view s);

/// nfc() followed by to_lower().
std::string normalize_word(std::string_view s);

std::size_t scalar_count(std::string_view s);

std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
void append_utf8(std::string& out, char32_t c);

bool is_whitespace(char32_t c);
/// Unicode P* categories plus every ASCII punctuation/symbol character.
bool is_punctuation(char32_t c);
/// Unicode S* categories (currency, math, modifier and other symbols).
bool is_symbol(char32_t c);
bool is_extended_pictographic(char32_t c);
bool is_regional_indicator(char32_t c);
bool is_emoji_modifier(char32_t c);
bool is_emoji_component(char32_t c);
/// Emoji property set used for Token::kind == emoji.
bool is_emoji_scalar(char32_t c);

inline constexpr char32_t kZeroWidthJoiner = 0x200D;
inline constexpr char32_t kVariationSelector16 = 0xFE0F;

/// Collapses runs of Unicode whitespace to one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// Splits on Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

}  // namespace csent::unicode
