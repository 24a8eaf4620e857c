#include "unitok/bpe.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "unitok/verify.hpp"

namespace unitok {
namespace {

// Independent trainer used as the oracle: recounts every pair from scratch
// each round over a list-of-lists corpus, picks the highest weighted count
// with an explicit lexicographic tie-break, and rewrites words by hand.
std::vector<MergePair> naive_train(
    const std::vector<std::pair<std::u32string, std::uint64_t>>& corpus_in,
    std::size_t target) {
  std::vector<std::pair<std::vector<std::u32string>, std::uint64_t>> corpus;
  for (const auto& [word, count] : corpus_in) {
    std::vector<std::u32string> toks;
    for (char32_t c : word) toks.emplace_back(1, c);
    corpus.emplace_back(toks, count);
  }
  std::vector<MergePair> merges;
  for (std::size_t round = 0; round < target; ++round) {
    std::map<MergePair, std::uint64_t> freq;
    for (const auto& [toks, count] : corpus)
      for (std::size_t i = 0; i + 1 < toks.size(); ++i) freq[{toks[i], toks[i + 1]}] += count;
    if (freq.empty()) break;
    MergePair best;
    std::uint64_t best_count = 0;
    for (const auto& [pair, c] : freq) {
      if (c > best_count || (c == best_count && pair < best)) {
        best = pair;
        best_count = c;
      }
    }
    merges.push_back(best);
    for (auto& [toks, count] : corpus) {
      std::vector<std::u32string> out;
      for (std::size_t i = 0; i < toks.size();) {
        if (i + 1 < toks.size() && toks[i] == best.first && toks[i + 1] == best.second) {
          out.push_back(best.first + best.second);
          i += 2;
        } else {
          out.push_back(toks[i]);
          ++i;
        }
      }
      toks = out;
    }
  }
  return merges;
}

WordCounts make_counts(const std::vector<std::pair<std::u32string, std::uint64_t>>& words) {
  WordCounts counts;
  for (const auto& [w, c] : words) counts.add(w, c);
  return counts;
}

TEST(TrainBpe, SingleWordCorpusMatchesOracle) {
  // One-word corpus {abbc}; every pair ties at count 1, so the
  // lexicographic tie-break decides each round. Frozen from the oracle:
  // (a,b) wins round 1, then (ab,b), then (abb,c).
  const std::vector<std::pair<std::u32string, std::uint64_t>> corpus = {{U"abbc", 1}};
  const std::vector<MergePair> expected = {
      {U"a", U"b"}, {U"ab", U"b"}, {U"abb", U"c"}};
  EXPECT_EQ(naive_train(corpus, 3), expected);

  const BpeModel model = train_bpe(make_counts(corpus), 3);
  EXPECT_EQ(model.merges(), expected);
  EXPECT_TRUE(model.vocab().count(U"abbc"));
}

TEST(TrainBpe, SinglePairCorpus) {
  const BpeModel model = train_bpe(make_counts({{U"aa", 5}}), 1);
  ASSERT_EQ(model.merges().size(), 1u);
  EXPECT_EQ(model.merges()[0], (MergePair{U"a", U"a"}));
  EXPECT_EQ(model.vocab(), (std::unordered_set<std::u32string>{U"a", U"aa"}));
}

TEST(TrainBpe, ZeroTargetKeepsAlphabet) {
  const BpeModel model = train_bpe(make_counts({{U"ab", 3}}), 0);
  EXPECT_TRUE(model.merges().empty());
  EXPECT_EQ(model.vocab(), (std::unordered_set<std::u32string>{U"a", U"b"}));
}

TEST(TrainBpe, EmptyCorpusRejected) {
  EXPECT_THROW(train_bpe(WordCounts{}, 4), Error);
}

TEST(TrainBpe, StopsEarlyWithoutCooccurrence) {
  const BpeModel model = train_bpe(make_counts({{U"a", 9}, {U"b", 2}}), 5);
  EXPECT_TRUE(model.merges().empty());
}

TEST(TrainBpe, MatchesOracleOnRandomCorpora) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<std::u32string, std::uint64_t>> corpus;
    const int n_words = 1 + static_cast<int>(rng() % 6);
    for (int w = 0; w < n_words; ++w) {
      std::u32string word;
      const int len = 1 + static_cast<int>(rng() % 6);
      for (int i = 0; i < len; ++i) word += static_cast<char32_t>(U'a' + rng() % 3);
      corpus.emplace_back(word, 1 + rng() % 4);
    }
    WordCounts counts;
    for (const auto& [w, c] : corpus) counts.add(w, c);
    const std::size_t target = rng() % 8;
    EXPECT_EQ(train_bpe(counts, target).merges(), naive_train(corpus, target))
        << "trial " << trial;
  }
}

TEST(BpeEncode, DeterministicOnPaperInstance) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(1);
  EXPECT_EQ(bpe_encode(U"abbc", model, 0.0, rng), (Tokenization{U"ab", U"bc"}));
}

TEST(BpeEncode, SingleCharacter) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(1);
  EXPECT_EQ(bpe_encode(U"a", model, 0.7, rng), (Tokenization{U"a"}));
}

TEST(BpeEncode, FullDropoutLeavesCharacters) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(1);
  EXPECT_EQ(bpe_encode(U"abbc", model, 1.0, rng),
            (Tokenization{U"a", U"b", U"b", U"c"}));
}

TEST(BpeEncode, OverlappingOccurrencesMergeLeftToRight) {
  MergeList merges;
  merges.merges = {{U"a", U"a"}};
  const BpeModel model({U'a'}, std::move(merges));
  Rng rng(1);
  EXPECT_EQ(bpe_encode(U"aaaa", model, 0.0, rng), (Tokenization{U"aa", U"aa"}));
  EXPECT_EQ(bpe_encode(U"aaa", model, 0.0, rng), (Tokenization{U"aa", U"a"}));
  EXPECT_EQ(bpe_encode(U"aaaaa", model, 0.0, rng), (Tokenization{U"aa", U"aa", U"a"}));
}

TEST(BpeEncode, ZeroDropoutIgnoresRngEntirely) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(99);
  const Rng before = rng;
  bpe_encode(U"abbc", model, 0.0, rng);
  EXPECT_TRUE(rng == before);  // no draws consumed
}

TEST(BpeEncode, UnknownCharacterRejected) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(1);
  try {
    bpe_encode(U"abxc", model, 0.0, rng);
    FAIL() << "expected UntokenizableError";
  } catch (const UntokenizableError& e) {
    EXPECT_NE(std::string(e.what()).find('x'), std::string::npos);
  }
}

TEST(BpeEncode, InvalidProbabilityRejected) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  Rng rng(1);
  EXPECT_THROW(bpe_encode(U"abbc", model, 1.5, rng), ConfigError);
  EXPECT_THROW(bpe_encode(U"abbc", model, -0.1, rng), ConfigError);
}

TEST(BpeEncode, LosslessOnRandomWords) {
  std::mt19937_64 rng(31);
  Rng coin_rng(5);
  const BpeModel model =
      train_bpe(make_counts({{U"abcabc", 4}, {U"bca", 2}, {U"cab", 7}}), 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string word;
    const int len = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < len; ++i) word += static_cast<char32_t>(U'a' + rng() % 3);
    const double p = (trial % 4) * 0.25;
    EXPECT_EQ(concat(bpe_encode(word, model, p, coin_rng)), word);
  }
}

// Closed forms for the constructed instance: the word abbc has exactly
// five outcomes with probabilities p^3, p^2(1-p), p(1-p), (1-p)p, (1-p)^2.
TEST(ExactBpeDropout, ClosedFormAtHalf) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  const DistributionReport dist = exact_bpe_dropout_dist(U"abbc", model, 0.5);
  ASSERT_EQ(dist.rows.size(), 5u);
  EXPECT_NEAR(dist.probability_of({U"a", U"b", U"b", U"c"}), 0.125, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"a", U"b", U"bc"}), 0.125, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"a", U"bb", U"c"}), 0.25, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"ab", U"b", U"c"}), 0.25, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"ab", U"bc"}), 0.25, 1e-12);
  EXPECT_NEAR(dist.total(), 1.0, 1e-12);
}

TEST(ExactBpeDropout, ClosedFormAtTenth) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  const DistributionReport dist = exact_bpe_dropout_dist(U"abbc", model, 0.1);
  EXPECT_NEAR(dist.probability_of({U"ab", U"bc"}), 0.81, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"ab", U"b", U"c"}), 0.09, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"a", U"bb", U"c"}), 0.09, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"a", U"b", U"bc"}), 0.009, 1e-12);
  EXPECT_NEAR(dist.probability_of({U"a", U"b", U"b", U"c"}), 0.001, 1e-12);
}

TEST(ExactBpeDropout, SingleCharacterPointMass) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  const DistributionReport dist = exact_bpe_dropout_dist(U"a", model, 0.37);
  ASSERT_EQ(dist.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(dist.rows[0].probability, 1.0);
  EXPECT_EQ(dist.rows[0].tokenization, (Tokenization{U"a"}));
}

TEST(ExactBpeDropout, CanonicalRowFlagged) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  const DistributionReport dist = exact_bpe_dropout_dist(U"abbc", model, 0.3);
  const DistRow* row = dist.find({U"ab", U"bc"});
  ASSERT_NE(row, nullptr);
  EXPECT_TRUE(row->is_canonical);
  EXPECT_EQ(dist.canonical, (Tokenization{U"ab", U"bc"}));
}

TEST(ExactBpeDropout, GuardRefusesLongWords) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  EXPECT_THROW(exact_bpe_dropout_dist(U"abbcabbcabbca", model, 0.5), LimitError);
}

TEST(ExactBpeDropout, SumsToOneAcrossGrid) {
  const BpeModel model =
      train_bpe(make_counts({{U"abcabc", 4}, {U"bca", 2}, {U"cab", 7}}), 6);
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const DistributionReport dist = exact_bpe_dropout_dist(U"abcabc", model, p);
    EXPECT_NEAR(dist.total(), 1.0, 1e-12) << "p=" << p;
  }
}

TEST(ExactBpeDropout, NoUniformizingDropoutRateExists) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  for (int i = 1; i <= 19; ++i) {
    const double p = i / 20.0;
    const DistributionReport dist = exact_bpe_dropout_dist(U"abbc", model, p);
    double lo = 1.0, hi = 0.0;
    for (const auto& r : dist.rows) {
      lo = std::min(lo, r.probability);
      hi = std::max(hi, r.probability);
    }
    EXPECT_GT(hi - lo, 1e-9) << "p=" << p;
  }
}

TEST(BpeSampling, EmpiricalMatchesExactDistribution) {
  const BpeModel model = builtin::nonuniform_bpe_model();
  const DistributionReport exact = exact_bpe_dropout_dist(U"abbc", model, 0.5);
  Rng rng(424242);
  const std::uint64_t n = 50'000;
  std::map<Tokenization, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) counts[bpe_encode(U"abbc", model, 0.5, rng)] += 1;
  double l1 = 0.0;
  for (const auto& r : exact.rows) {
    const auto it = counts.find(r.tokenization);
    const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / n;
    l1 += std::abs(freq - r.probability);
  }
  const double bound = 3.0 * std::sqrt(static_cast<double>(exact.rows.size()) / n);
  EXPECT_LT(0.5 * l1, bound);
}

TEST(BpeModelFiles, RoundTripIsByteIdentical) {
  const BpeModel model =
      train_bpe(make_counts({{U"abcabc", 4}, {U"bca", 2}, {U"cab", 7}}), 5);
  std::ostringstream merges1, vocab1;
  save_merges(model, merges1);
  save_bpe_vocab(model, vocab1);

  std::istringstream merges_in(merges1.str()), vocab_in(vocab1.str());
  const BpeModel reloaded = load_bpe_model(merges_in, vocab_in);
  EXPECT_EQ(reloaded.merges(), model.merges());
  EXPECT_EQ(reloaded.alphabet(), model.alphabet());

  std::ostringstream merges2, vocab2;
  save_merges(reloaded, merges2);
  save_bpe_vocab(reloaded, vocab2);
  EXPECT_EQ(merges2.str(), merges1.str());
  EXPECT_EQ(vocab2.str(), vocab1.str());
}

TEST(BpeModelFiles, CorruptFilesRejected) {
  {
    // Duplicate merge pair.
    std::istringstream merges("a b\na b\n"), vocab("a\nb\nab\n");
    EXPECT_THROW(load_bpe_model(merges, vocab), Error);
  }
  {
    // Merge side not derivable from earlier merges.
    std::istringstream merges("ab c\n"), vocab("a\nb\nc\nabc\n");
    EXPECT_THROW(load_bpe_model(merges, vocab), Error);
  }
  {
    // Vocab does not match alphabet plus products.
    std::istringstream merges("a b\n"), vocab("a\nb\nab\nzz\n");
    EXPECT_THROW(load_bpe_model(merges, vocab), Error);
  }
  {
    // Malformed merge line.
    std::istringstream merges("a b c\n"), vocab("a\nb\n");
    EXPECT_THROW(load_bpe_model(merges, vocab), Error);
  }
}

}  // namespace
}  // namespace unitok
