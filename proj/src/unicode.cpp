#include "csent/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "csent/error.hpp"

namespace csent::unicode {

namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString src = from_utf8(s);
  if (normalizer->isNormalized(src, status) && U_SUCCESS(status)) return to_utf8(src);
  status = U_ZERO_ERROR;
  icu::UnicodeString out = normalizer->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return to_utf8(out);
}

std::string to_lower(std::string_view s) {
  icu::UnicodeString u = from_utf8(s);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string normalize_word(std::string_view s) { return to_lower(nfc(s)); }

std::size_t scalar_count(std::string_view s) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  std::size_t n = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    ++n;
  }
  return n;
}

std::u32string decode(std::string_view s) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  std::u32string out;
  out.reserve(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[4];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, 4, static_cast<UChar32>(c), error);
  if (error) {
    out += "\xEF\xBF\xBD";
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_punctuation(char32_t c) {
  if (c < 0x80) return c > 0x20 && c < 0x7F && !(c >= '0' && c <= '9') &&
                       !(c >= 'a' && c <= 'z') && !(c >= 'A' && c <= 'Z');
  return u_ispunct(static_cast<UChar32>(c));
}

bool is_symbol(char32_t c) {
  switch (u_charType(static_cast<UChar32>(c))) {
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return true;
    default:
      return false;
  }
}

bool is_extended_pictographic(char32_t c) {
  return u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_EXTENDED_PICTOGRAPHIC);
}

bool is_regional_indicator(char32_t c) { return c >= 0x1F1E6 && c <= 0x1F1FF; }

bool is_emoji_modifier(char32_t c) {
  return u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_EMOJI_MODIFIER);
}

bool is_emoji_component(char32_t c) {
  return u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_EMOJI_COMPONENT);
}

bool is_emoji_scalar(char32_t c) {
  return is_extended_pictographic(c) || is_regional_indicator(c) || is_emoji_modifier(c) ||
         c == kZeroWidthJoiner || c == kVariationSelector16 ||
         (c >= 0xE0020 && c <= 0xE007F);  // tag sequence characters (subdivision flags)
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t c : decode(s)) {
    if (is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> parts;
  std::string current;
  for (char32_t c : decode(s)) {
    if (is_whitespace(c)) {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      append_utf8(current, c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

}  // namespace csent::unicode
