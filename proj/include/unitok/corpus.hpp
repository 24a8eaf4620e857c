#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <unordered_map>

#include "unitok/text.hpp"

namespace unitok {

// Word frequency table over a whitespace pre-tokenized corpus.
struct WordCounts {
  std::unordered_map<std::u32string, std::uint64_t> entries;
  std::set<char32_t> alphabet;

  bool empty() const { return entries.empty(); }

  std::uint64_t total_words() const {
    std::uint64_t n = 0;
    for (const auto& [w, c] : entries) n += c;
    return n;
  }

  void add(const std::u32string& word, std::uint64_t count = 1) {
    if (word.empty()) return;
    entries[word] += count;
    for (char32_t c : word) alphabet.insert(c);
  }

  // Commutative, so chunked parallel ingestion merges to the same table as
  // a sequential pass.
  void merge(const WordCounts& other) {
    for (const auto& [w, c] : other.entries) entries[w] += c;
    alphabet.insert(other.alphabet.begin(), other.alphabet.end());
  }
};

// Whitespace pre-tokenization over a line-oriented UTF-8 stream. No
// lowercasing, no punctuation splitting. An optional end-of-word suffix is
// appended to every word (off by default). Throws Utf8Error with the byte
// offset of the first invalid byte.
inline WordCounts ingest(std::istream& in, const std::u32string& end_of_word = U"") {
  WordCounts counts;
  std::string line;
  std::size_t stream_offset = 0;
  while (std::getline(in, line)) {
    const std::u32string text = decode_utf8(line, stream_offset);
    for (auto& word : split_whitespace(text)) {
      if (!end_of_word.empty()) word += end_of_word;
      counts.add(word);
    }
    stream_offset += line.size() + 1;
  }
  return counts;
}

}  // namespace unitok
