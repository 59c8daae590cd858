#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace valueprobe::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes UTF-8 into codepoints. Malformed byte sequences decode to U+FFFD,
// which is not a letter and therefore acts as a token boundary.
inline std::vector<char32_t> decode_utf8(std::string_view input) {
  std::vector<char32_t> out;
  out.reserve(input.size());
  std::size_t i = 0;
  while (i < input.size()) {
    const unsigned char b0 = static_cast<unsigned char>(input[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    if (i + len > input.size()) {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char b = static_cast<unsigned char>(input[i + k]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!valid || (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF) {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Letter classification over the major alphabetic blocks. Not a full Unicode
// property table; anything outside these ranges splits tokens.
inline bool is_letter(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp < 0x80) return false;
  struct Range {
    char32_t lo, hi;
  };
  static constexpr Range ranges[] = {
      {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x024F},  // Latin-1 + Extended-A/B
      {0x0386, 0x0386}, {0x0388, 0x03FF},                     // Greek
      {0x0400, 0x04FF}, {0x0531, 0x0556}, {0x0561, 0x0587},   // Cyrillic, Armenian
      {0x05D0, 0x05EA}, {0x0620, 0x064A},                     // Hebrew, Arabic
      {0x3041, 0x3096}, {0x30A1, 0x30FA},                     // Hiragana, Katakana
      {0x4E00, 0x9FFF}, {0xAC00, 0xD7A3},                     // CJK, Hangul
  };
  for (const auto& r : ranges)
    if (cp >= r.lo && cp <= r.hi) return true;
  return false;
}

// Simple lowercase fold covering ASCII, Latin-1, Greek, and Cyrillic
// capitals. Letters outside those ranges pass through unchanged.
inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if ((cp >= 0x00C0 && cp <= 0x00D6) || (cp >= 0x00D8 && cp <= 0x00DE)) return cp + 0x20;
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

inline std::string to_lower_copy(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  for (const char32_t cp : decode_utf8(input)) encode_utf8(to_lower(cp), out);
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace valueprobe::text
