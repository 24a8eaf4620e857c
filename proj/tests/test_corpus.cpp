#include "unitok/corpus.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace unitok {
namespace {

WordCounts ingest_string(const std::string& text) {
  std::istringstream in(text);
  return ingest(in);
}

TEST(Ingest, CountsAndAlphabet) {
  const WordCounts counts = ingest_string("a b a\n");
  EXPECT_EQ(counts.entries.at(U"a"), 2u);
  EXPECT_EQ(counts.entries.at(U"b"), 1u);
  EXPECT_EQ(counts.entries.size(), 2u);
  EXPECT_EQ(counts.alphabet, (std::set<char32_t>{U'a', U'b'}));
}

TEST(Ingest, EmptyInput) {
  const WordCounts counts = ingest_string("");
  EXPECT_TRUE(counts.empty());
  EXPECT_TRUE(counts.alphabet.empty());
}

TEST(Ingest, RepeatedWordAcrossLines) {
  // Three occurrences of abbc over two lines.
  const WordCounts counts = ingest_string("abbc abbc\nabbc\n");
  EXPECT_EQ(counts.entries.size(), 1u);
  EXPECT_EQ(counts.entries.at(U"abbc"), 3u);
  EXPECT_EQ(counts.alphabet, (std::set<char32_t>{U'a', U'b', U'c'}));
}

TEST(Ingest, TotalMatchesFieldCount) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::string text;
    std::uint64_t fields = 0;
    for (int i = 0; i < 200; ++i) {
      const int len = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < len; ++k) text += static_cast<char>('a' + rng() % 3);
      ++fields;
      text += (rng() % 5 == 0) ? '\n' : ' ';
    }
    EXPECT_EQ(ingest_string(text).total_words(), fields);
  }
}

TEST(Ingest, ChunkedMergeEqualsSequential) {
  const std::string part1 = "ab ba ab\ncc ab\n";
  const std::string part2 = "ba cc cc\n";
  WordCounts chunked = ingest_string(part1);
  chunked.merge(ingest_string(part2));
  const WordCounts sequential = ingest_string(part1 + part2);
  EXPECT_EQ(chunked.entries, sequential.entries);
  EXPECT_EQ(chunked.alphabet, sequential.alphabet);
}

TEST(Ingest, MergeIsOrderIndependent) {
  WordCounts ab = ingest_string("x yy\n");
  ab.merge(ingest_string("yy z\n"));
  WordCounts ba = ingest_string("yy z\n");
  ba.merge(ingest_string("x yy\n"));
  EXPECT_EQ(ab.entries, ba.entries);
}

TEST(Ingest, InvalidUtf8ReportsStreamByteOffset) {
  std::istringstream in(std::string("ok\nab\x80") + "cd\n");
  try {
    ingest(in);
    FAIL() << "expected Utf8Error";
  } catch (const Utf8Error& e) {
    EXPECT_EQ(e.byte_offset(), 5u);  // 'o' 'k' '\n' 'a' 'b' -> offset 5
  }
}

TEST(Ingest, EndOfWordSuffix) {
  std::istringstream in("ab ab c\n");
  const WordCounts counts = ingest(in, U"_");
  EXPECT_EQ(counts.entries.at(U"ab_"), 2u);
  EXPECT_EQ(counts.entries.at(U"c_"), 1u);
  EXPECT_TRUE(counts.alphabet.count(U'_'));
}

}  // namespace
}  // namespace unitok
