#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "unitok/coins.hpp"
#include "unitok/corpus.hpp"
#include "unitok/error.hpp"
#include "unitok/report.hpp"
#include "unitok/rng.hpp"
#include "unitok/token.hpp"

namespace unitok {

using MergePair = std::pair<std::u32string, std::u32string>;

// Ordered merge sequence; list position is inference priority (earlier =
// higher). Each pair's concatenation is the produced token.
struct MergeList {
  std::vector<MergePair> merges;

  std::size_t size() const { return merges.size(); }

  // No duplicates; every side is a single character or the product of an
  // earlier merge.
  void validate() const {
    std::set<MergePair> seen;
    std::unordered_set<std::u32string> products;
    for (const auto& m : merges) {
      if (m.first.empty() || m.second.empty())
        throw Error("merge with empty side");
      if (!seen.insert(m).second)
        throw Error("duplicate merge pair: " + encode_utf8(m.first) + " " +
                    encode_utf8(m.second));
      for (const auto* side : {&m.first, &m.second}) {
        if (side->size() > 1 && !products.count(*side))
          throw Error("merge side not derivable from earlier merges: " +
                      encode_utf8(*side));
      }
      products.insert(m.first + m.second);
    }
  }
};

namespace detail {
struct MergePairHash {
  std::size_t operator()(const MergePair& p) const {
    const std::size_t h = std::hash<std::u32string>{}(p.first);
    return h ^ (std::hash<std::u32string>{}(p.second) + 0x9E3779B97F4A7C15ull +
                (h << 6) + (h >> 2));
  }
};
}  // namespace detail

class BpeModel {
 public:
  BpeModel() = default;

  BpeModel(std::set<char32_t> alphabet, MergeList merges)
      : alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
    merges_.validate();
    for (char32_t c : alphabet_) vocab_.insert(std::u32string(1, c));
    for (std::size_t r = 0; r < merges_.merges.size(); ++r) {
      const auto& m = merges_.merges[r];
      ranks_.emplace(m, r);
      vocab_.insert(m.first + m.second);
    }
  }

  const std::set<char32_t>& alphabet() const { return alphabet_; }
  const MergeList& merge_list() const { return merges_; }
  const std::vector<MergePair>& merges() const { return merges_.merges; }
  const std::unordered_set<std::u32string>& vocab() const { return vocab_; }

  std::optional<std::size_t> merge_rank(const MergePair& pair) const {
    auto it = ranks_.find(pair);
    if (it == ranks_.end()) return std::nullopt;
    return it->second;
  }

  bool in_alphabet(char32_t c) const { return alphabet_.count(c) > 0; }

 private:
  std::set<char32_t> alphabet_;
  MergeList merges_;
  std::unordered_map<MergePair, std::size_t, detail::MergePairHash> ranks_;
  std::unordered_set<std::u32string> vocab_;
};

// Iterative pair-merging trainer. Each round recounts adjacent-token pairs
// across the corpus (weighted by word count), appends the most frequent
// pair, and rewrites the corpus; ties resolve to the lexicographically
// smallest (left, right). Stops early once no pair cooccurs.
inline BpeModel train_bpe(const WordCounts& counts, std::size_t target_merges) {
  if (counts.empty()) throw Error("cannot train BPE on an empty corpus");

  std::vector<std::pair<std::vector<std::u32string>, std::uint64_t>> corpus;
  corpus.reserve(counts.entries.size());
  for (const auto& [word, count] : counts.entries) {
    std::vector<std::u32string> tokens;
    tokens.reserve(word.size());
    for (char32_t c : word) tokens.emplace_back(1, c);
    corpus.emplace_back(std::move(tokens), count);
  }

  MergeList merges;
  for (std::size_t round = 0; round < target_merges; ++round) {
    // std::map iterates pairs in lexicographic order, so keeping the first
    // strict maximum implements the tie-break.
    std::map<MergePair, std::uint64_t> pair_counts;
    for (const auto& [tokens, count] : corpus)
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        pair_counts[{tokens[i], tokens[i + 1]}] += count;
    if (pair_counts.empty()) break;

    const MergePair* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, c] : pair_counts) {
      if (c > best_count) {
        best = &pair;
        best_count = c;
      }
    }
    const MergePair winner = *best;
    merges.merges.push_back(winner);

    for (auto& [tokens, count] : corpus) {
      std::vector<std::u32string> merged;
      merged.reserve(tokens.size());
      for (std::size_t i = 0; i < tokens.size();) {
        if (i + 1 < tokens.size() && tokens[i] == winner.first &&
            tokens[i + 1] == winner.second) {
          merged.push_back(winner.first + winner.second);
          i += 2;
        } else {
          merged.push_back(std::move(tokens[i]));
          ++i;
        }
      }
      tokens = std::move(merged);
    }
  }
  return BpeModel(counts.alphabet, std::move(merges));
}

// BPE inference parameterized over the dropout coin source (true = keep).
//
// Every adjacent pair present in the merge list is a candidate. A candidate
// is identified by its character span in the original word (left start,
// split, right end); its coin is flipped the first time it appears and the
// decision is remembered for the rest of the word, matching the dropout
// distribution analysis (a dropped candidate stays dropped). Each round the
// surviving candidate pair highest in merge priority is applied; its
// surviving occurrences merge left to right. Candidates are visited left to
// right, so the coin stream is reproducible.
template <class Coin>
Tokenization bpe_encode_with_coins(const std::u32string& word, const BpeModel& model,
                                   Coin&& coin) {
  for (char32_t c : word) {
    if (!model.in_alphabet(c))
      throw UntokenizableError("character '" + encode_utf8(std::u32string(1, c)) +
                                   "' outside the model alphabet in word '" +
                                   encode_utf8(word) + "'",
                               encode_utf8(word));
  }

  struct Span {
    std::uint32_t begin, end;
  };
  std::vector<Span> tokens;
  tokens.reserve(word.size());
  for (std::uint32_t i = 0; i < word.size(); ++i) tokens.push_back({i, i + 1});

  using CandidateKey = std::array<std::uint32_t, 3>;
  std::map<CandidateKey, bool> coins;

  const auto surface = [&](const Span& s) { return word.substr(s.begin, s.end - s.begin); };

  while (tokens.size() > 1) {
    struct Survivor {
      std::size_t index;  // position of the left token
      std::size_t rank;
    };
    std::vector<Survivor> survivors;
    std::size_t best_rank = SIZE_MAX;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      const auto rank = model.merge_rank({surface(tokens[i]), surface(tokens[i + 1])});
      if (!rank) continue;
      const CandidateKey key{tokens[i].begin, tokens[i].end, tokens[i + 1].end};
      auto it = coins.find(key);
      if (it == coins.end()) it = coins.emplace(key, coin()).first;
      if (!it->second) continue;
      survivors.push_back({i, *rank});
      if (*rank < best_rank) best_rank = *rank;
    }
    if (survivors.empty()) break;

    std::vector<Span> next;
    next.reserve(tokens.size());
    std::size_t s = 0;
    for (std::size_t i = 0; i < tokens.size();) {
      while (s < survivors.size() && survivors[s].index < i) ++s;
      if (s < survivors.size() && survivors[s].index == i && survivors[s].rank == best_rank) {
        next.push_back({tokens[i].begin, tokens[i + 1].end});
        i += 2;
      } else {
        next.push_back(tokens[i]);
        ++i;
      }
    }
    tokens = std::move(next);
  }

  Tokenization out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(surface(t));
  return out;
}

inline void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("dropout probability must lie in [0, 1]");
}

// Dropout BPE encoding. dropout_p = 0 reproduces deterministic BPE and does
// not consume randomness; dropout_p = 1 leaves the word as characters.
inline Tokenization bpe_encode(const std::u32string& word, const BpeModel& model,
                               double dropout_p, Rng& rng) {
  check_probability(dropout_p);
  if (dropout_p <= 0.0)
    return bpe_encode_with_coins(word, model, [] { return true; });
  if (dropout_p >= 1.0)
    return bpe_encode_with_coins(word, model, [] { return false; });
  return bpe_encode_with_coins(word, model,
                               [&] { return unit_double(rng) > dropout_p; });
}

inline Tokenization bpe_encode_deterministic(const std::u32string& word,
                                             const BpeModel& model) {
  return bpe_encode_with_coins(word, model, [] { return true; });
}

// Exact dropout distribution by exhaustive branching over every coin the
// encoder flips. Guarded: refuses words longer than kOracleMaxWordLen.
inline DistributionReport exact_bpe_dropout_dist(const std::u32string& word,
                                                 const BpeModel& model, double dropout_p) {
  check_probability(dropout_p);
  if (word.size() > kOracleMaxWordLen)
    throw LimitError("word too long for exhaustive dropout enumeration (guard " +
                         std::to_string(kOracleMaxWordLen) + "): " + encode_utf8(word),
                     std::to_string(word.size()));
  auto probs = enumerate_coin_outcomes(
      [&](auto& coin) { return bpe_encode_with_coins(word, model, coin); }, dropout_p);
  return make_exact_report(word, probs, bpe_encode_deterministic(word, model));
}

// --- model files ---------------------------------------------------------
// merges file: one merge per line, "left right", in priority order.
// vocab file: one token per line; alphabet first (code-point order), then
// merge products in priority order. Both round-trip losslessly.

inline void save_merges(const BpeModel& model, std::ostream& out) {
  for (const auto& m : model.merges())
    out << encode_utf8(m.first) << ' ' << encode_utf8(m.second) << '\n';
}

inline void save_bpe_vocab(const BpeModel& model, std::ostream& out) {
  for (char32_t c : model.alphabet()) out << encode_utf8(std::u32string(1, c)) << '\n';
  for (const auto& m : model.merges()) out << encode_utf8(m.first + m.second) << '\n';
}

inline BpeModel load_bpe_model(std::istream& merges_in, std::istream& vocab_in) {
  MergeList merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(merges_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto pieces = split_whitespace(decode_utf8(line));
    if (pieces.size() != 2)
      throw Error("merges file line " + std::to_string(line_no) +
                  ": expected \"left right\"");
    merges.merges.emplace_back(pieces[0], pieces[1]);
  }

  std::set<char32_t> alphabet;
  std::unordered_set<std::u32string> vocab;
  line_no = 0;
  while (std::getline(vocab_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::u32string token = decode_utf8(line);
    if (!vocab.insert(token).second)
      throw Error("vocab file line " + std::to_string(line_no) + ": duplicate token");
    if (token.size() == 1) alphabet.insert(token[0]);
  }

  BpeModel model(std::move(alphabet), std::move(merges));
  if (model.vocab() != vocab)
    throw Error("vocab file does not match alphabet plus merge products");
  return model;
}

}  // namespace unitok
