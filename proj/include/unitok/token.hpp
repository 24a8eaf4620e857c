#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "unitok/text.hpp"

namespace unitok {

// A tokenization is a sequence of vocabulary surfaces whose concatenation
// recovers the word. Position classes are positional: the first token of a
// word is word-initial, the rest are word-internal, so no per-token class
// needs to be stored.
using Tokenization = std::vector<std::u32string>;

inline std::u32string concat(const Tokenization& tokens) {
  std::u32string word;
  for (const auto& t : tokens) word += t;
  return word;
}

// Space-joined UTF-8 rendering. When `marker` is non-empty, non-initial
// tokens carry the marker prefix.
inline std::string render(const Tokenization& tokens, std::u32string_view marker = U"") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      out += ' ';
      out += encode_utf8(marker);
    }
    out += encode_utf8(tokens[i]);
  }
  return out;
}

// Inverse of render for a single word's tokens: strips the marker prefix
// from non-initial tokens.
inline Tokenization parse_rendered(const std::vector<std::u32string>& pieces,
                                   std::u32string_view marker = U"") {
  Tokenization out;
  out.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (i > 0 && !marker.empty() && p.size() >= marker.size() &&
        std::u32string_view(p).substr(0, marker.size()) == marker) {
      out.emplace_back(p.substr(marker.size()));
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace unitok
