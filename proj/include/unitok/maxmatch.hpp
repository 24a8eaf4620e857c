#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "unitok/bpe.hpp"
#include "unitok/coins.hpp"
#include "unitok/error.hpp"
#include "unitok/report.hpp"
#include "unitok/rng.hpp"
#include "unitok/token.hpp"

namespace unitok {

// Subword inventory with word-initial and word-internal position classes.
// Serialized internal entries carry the marker prefix ("#" by default).
class SubwordVocab {
 public:
  SubwordVocab() = default;

  SubwordVocab(std::vector<std::u32string> initial, std::vector<std::u32string> internal,
               std::u32string marker = U"#")
      : marker_(std::move(marker)) {
    for (auto& s : initial) insert(std::move(s), false);
    for (auto& s : internal) insert(std::move(s), true);
    validate();
  }

  bool contains(const std::u32string& surface, bool internal) const {
    return (internal ? internal_ : initial_).count(surface) > 0;
  }

  std::size_t max_len() const { return max_len_; }
  const std::u32string& marker() const { return marker_; }
  const std::set<std::u32string>& initial() const { return initial_; }
  const std::set<std::u32string>& internal() const { return internal_; }

  std::set<char32_t> alphabet() const {
    std::set<char32_t> chars;
    for (const auto* entries : {&initial_, &internal_})
      for (const auto& s : *entries) chars.insert(s.begin(), s.end());
    return chars;
  }

  // Surfaces non-empty; every character occurring in any surface is itself
  // a word-initial entry, which guarantees the single-character fallback at
  // position 0.
  void validate() const {
    if (marker_.empty()) throw Error("empty vocab marker");
    if (initial_.count(std::u32string()) || internal_.count(std::u32string()))
      throw Error("empty surface in vocabulary");
    for (char32_t c : alphabet())
      if (!initial_.count(std::u32string(1, c)))
        throw Error("alphabet character '" + encode_utf8(std::u32string(1, c)) +
                    "' missing from the word-initial entries");
  }

 private:
  void insert(std::u32string surface, bool internal) {
    max_len_ = std::max(max_len_, surface.size());
    (internal ? internal_ : initial_).insert(std::move(surface));
  }

  std::set<std::u32string> initial_;
  std::set<std::u32string> internal_;
  std::u32string marker_ = U"#";
  std::size_t max_len_ = 0;
};

// Greedy longest-match inference parameterized over the dropout coin
// source. At each position the match candidates are visited in increasing
// length; every dictionary hit flips one coin and the longest accepted
// match wins. If all hits are dropped the single character is emitted
// unconditionally, so encoding only fails when a character lacks a
// vocabulary entry of the required position class.
template <class Coin>
Tokenization maxmatch_encode_with_coins(const std::u32string& word,
                                        const SubwordVocab& vocab, Coin&& coin) {
  Tokenization out;
  std::size_t i = 0;
  while (i < word.size()) {
    const bool internal = i > 0;
    const std::u32string fallback = word.substr(i, 1);
    std::size_t accepted_len = 1;
    for (std::size_t j = 1; j <= vocab.max_len() && i + j <= word.size(); ++j) {
      if (!vocab.contains(word.substr(i, j), internal)) continue;
      if (coin()) accepted_len = j;
    }
    if (accepted_len == 1 && !vocab.contains(fallback, internal))
      throw UntokenizableError(
          "no usable match at position " + std::to_string(i) + " of word '" +
              encode_utf8(word) + "' (character '" + encode_utf8(fallback) +
              "' lacks a " + (internal ? "word-internal" : "word-initial") + " entry)",
          encode_utf8(word));
    out.push_back(word.substr(i, accepted_len));
    i += accepted_len;
  }
  return out;
}

inline Tokenization maxmatch_encode(const std::u32string& word, const SubwordVocab& vocab,
                                    double dropout_p, Rng& rng) {
  check_probability(dropout_p);
  if (dropout_p <= 0.0)
    return maxmatch_encode_with_coins(word, vocab, [] { return true; });
  if (dropout_p >= 1.0)
    return maxmatch_encode_with_coins(word, vocab, [] { return false; });
  return maxmatch_encode_with_coins(word, vocab,
                                    [&] { return unit_double(rng) > dropout_p; });
}

inline Tokenization maxmatch_encode_deterministic(const std::u32string& word,
                                                  const SubwordVocab& vocab) {
  return maxmatch_encode_with_coins(word, vocab, [] { return true; });
}

inline DistributionReport exact_maxmatch_dropout_dist(const std::u32string& word,
                                                      const SubwordVocab& vocab,
                                                      double dropout_p) {
  check_probability(dropout_p);
  if (word.size() > kOracleMaxWordLen)
    throw LimitError("word too long for exhaustive dropout enumeration (guard " +
                         std::to_string(kOracleMaxWordLen) + "): " + encode_utf8(word),
                     std::to_string(word.size()));
  auto probs = enumerate_coin_outcomes(
      [&](auto& coin) { return maxmatch_encode_with_coins(word, vocab, coin); },
      dropout_p);
  return make_exact_report(word, probs, maxmatch_encode_deterministic(word, vocab));
}

// Position-classed view of a trained BPE vocabulary: every token becomes
// both an initial and an internal entry.
inline SubwordVocab derive_marked_vocab(const BpeModel& model,
                                        std::u32string marker = U"#") {
  std::vector<std::u32string> entries(model.vocab().begin(), model.vocab().end());
  return SubwordVocab(entries, entries, std::move(marker));
}

// vocab file: one token per line, internal entries marker-prefixed;
// initial entries first, each class in code-point order. save(load(save))
// is bit-identical.
inline void save_subword_vocab(const SubwordVocab& vocab, std::ostream& out) {
  for (const auto& s : vocab.initial()) out << encode_utf8(s) << '\n';
  for (const auto& s : vocab.internal())
    out << encode_utf8(vocab.marker()) << encode_utf8(s) << '\n';
}

inline SubwordVocab load_subword_vocab(std::istream& in, std::u32string marker = U"#") {
  std::vector<std::u32string> initial, internal;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::u32string token = decode_utf8(line);
    if (token.size() > marker.size() && token.compare(0, marker.size(), marker) == 0)
      internal.push_back(token.substr(marker.size()));
    else
      initial.push_back(token);
  }
  return SubwordVocab(std::move(initial), std::move(internal), std::move(marker));
}

}  // namespace unitok
