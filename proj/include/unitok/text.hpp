#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "unitok/error.hpp"

// UTF-8 <-> code point conversion and Unicode whitespace splitting.
// Words are sequences of Unicode scalar values throughout the library;
// byte strings appear only at I/O boundaries.

namespace unitok {

inline bool is_unicode_whitespace(char32_t c) {
  switch (c) {
    case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
    case 0x0085:  // NEL
    case 0x00A0:  // NBSP
    case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Strict decoder: rejects overlong forms, surrogates and values past
// U+10FFFF. base_offset shifts reported offsets when decoding a slice of a
// larger stream.
inline std::u32string decode_utf8(std::string_view bytes, std::size_t base_offset = 0) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const auto fail = [&](const char* msg, std::size_t at) {
    throw Utf8Error(msg, base_offset + at);
  };
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      fail("invalid UTF-8 lead byte", i);
      return out;  // unreachable
    }
    if (i + len > bytes.size()) fail("truncated UTF-8 sequence", i);
    for (int k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) fail("invalid UTF-8 continuation byte", i + k);
      cp = (cp << 6) | (bk & 0x3F);
    }
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len]) fail("overlong UTF-8 encoding", i);
    if (cp >= 0xD800 && cp <= 0xDFFF) fail("UTF-8 encoded surrogate", i);
    if (cp > 0x10FFFF) fail("code point past U+10FFFF", i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

inline std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

// Maximal whitespace-free runs, in order.
inline std::vector<std::u32string> split_whitespace(std::u32string_view text) {
  std::vector<std::u32string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_unicode_whitespace(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_unicode_whitespace(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace unitok
