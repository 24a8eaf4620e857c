#include "unitok/regularizer.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "unitok/verify.hpp"

namespace unitok {
namespace {

StochasticTokenizer make_uniform_maxmatch(double rate, std::uint64_t seed = kDefaultSeed) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = Scheme::kMaxMatch;
  cfg.mode = Mode::kUniform;
  cfg.rate = rate;
  cfg.seed = seed;
  return StochasticTokenizer(builtin::six_path_vocab(), cfg);
}

BpeModel tiny_bpe_model() {
  WordCounts counts;
  counts.add(U"ababc", 5);
  counts.add(U"abc", 3);
  counts.add(U"cab", 2);
  return train_bpe(counts, 4);
}

TEST(Config, RateValidation) {
  StochasticTokenizerConfig cfg;
  cfg.rate = 1.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.rate = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.rate = 0.5;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, SchemeModelMismatchRejected) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = Scheme::kMaxMatch;
  EXPECT_THROW(StochasticTokenizer(tiny_bpe_model(), cfg), ConfigError);
  cfg.scheme = Scheme::kBpe;
  EXPECT_THROW(StochasticTokenizer(builtin::six_path_vocab(), cfg), ConfigError);
}

TEST(TokenizeWord, RateZeroIsCanonicalInBothModes) {
  for (Mode mode : {Mode::kDropout, Mode::kUniform}) {
    StochasticTokenizerConfig cfg;
    cfg.scheme = Scheme::kMaxMatch;
    cfg.mode = mode;
    cfg.rate = 0.0;
    const StochasticTokenizer tok(builtin::six_path_vocab(), cfg);
    Rng rng(77);
    EXPECT_EQ(tok.tokenize_word(U"ababc", rng), (Tokenization{U"ab", U"ab", U"c"}));
  }
}

TEST(TokenizeWord, UniformRateOneCoversAllPathsUniformly) {
  const StochasticTokenizer tok = make_uniform_maxmatch(1.0);
  std::map<Tokenization, std::uint64_t> counts;
  const std::uint64_t n = 30'000;
  for (std::uint64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(9, i, 0));
    counts[tok.tokenize_word(U"ababc", rng)] += 1;
  }
  ASSERT_EQ(counts.size(), 6u);
  double l1 = 0.0;
  for (const auto& [t, c] : counts) l1 += std::abs(static_cast<double>(c) / n - 1.0 / 6);
  EXPECT_LT(0.5 * l1, 0.03);
}

TEST(TokenizeWord, GateFrequencyConvergesToRate) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.25);
  std::uint64_t sampled = 0;
  const std::uint64_t n = 100'000;
  for (std::uint64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(123, i, 0));
    WordOutcome outcome = WordOutcome::kCanonical;
    tok.tokenize_word(U"ababc", rng, &outcome);
    if (outcome == WordOutcome::kUniformSampled) ++sampled;
  }
  EXPECT_NEAR(static_cast<double>(sampled) / n, 0.25, 0.01);
}

TEST(TokenizeWord, DropoutModeDelegatesToSchemeDropout) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = Scheme::kBpe;
  cfg.mode = Mode::kDropout;
  cfg.rate = 0.5;
  const StochasticTokenizer tok(builtin::nonuniform_bpe_model(), cfg);
  // Same seed, same stream: tokenize_word must equal a direct dropout
  // encode.
  Rng a(4242), b(4242);
  EXPECT_EQ(tok.tokenize_word(U"abbc", a),
            bpe_encode(U"abbc", builtin::nonuniform_bpe_model(), 0.5, b));
}

TEST(TokenizeSentence, PerWordSeedsMakeContextIrrelevant) {
  const StochasticTokenizer tok = make_uniform_maxmatch(1.0, 31337);
  const auto alone = tok.tokenize_sentence({U"ababc"}, 5);
  const auto embedded = tok.tokenize_sentence({U"ababc", U"ab", U"ababc"}, 5);
  // Word 0 of line 5 sees the same child seed in both sentences.
  EXPECT_EQ(alone[0], embedded[0]);
  // Same word later in the sentence draws a different seed.
  EXPECT_EQ(concat(embedded[2]), U"ababc");
}

TEST(TokenizeSentence, WordOrderPreservedAndLossless) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.6);
  const std::vector<std::u32string> words = {U"ab", U"ababc", U"c", U"abab"};
  const auto tokenized = tok.tokenize_sentence(words, 0);
  ASSERT_EQ(tokenized.size(), words.size());
  for (std::size_t i = 0; i < words.size(); ++i) EXPECT_EQ(concat(tokenized[i]), words[i]);
}

TEST(TokenizeCorpus, EmptyInput) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.5);
  std::istringstream in("");
  std::ostringstream out;
  const CorpusStats stats = tok.tokenize_corpus(in, out);
  EXPECT_TRUE(out.str().empty());
  EXPECT_EQ(stats.lines, 0u);
  EXPECT_EQ(stats.words, 0u);
  EXPECT_EQ(stats.tokens, 0u);
  EXPECT_EQ(stats.uniform_sampled, 0u);
}

TEST(TokenizeCorpus, DeterministicAcrossRunsAndWorkerCounts) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.4, 99);
  std::string corpus;
  for (int i = 0; i < 400; ++i)
    corpus += (i % 3 == 0) ? "ababc ab\n" : (i % 3 == 1 ? "abab c ababc\n" : "ab\n");

  std::string outputs[3];
  CorpusStats stats[3];
  const int workers[3] = {1, 1, 3};
  for (int k = 0; k < 3; ++k) {
    std::istringstream in(corpus);
    std::ostringstream out;
    stats[k] = tok.tokenize_corpus(in, out, workers[k]);
    outputs[k] = out.str();
  }
  EXPECT_EQ(outputs[0], outputs[1]);  // run-to-run
  EXPECT_EQ(outputs[0], outputs[2]);  // worker-count invariance
  EXPECT_EQ(stats[0].tokens, stats[2].tokens);
  EXPECT_EQ(stats[0].uniform_sampled, stats[2].uniform_sampled);
  EXPECT_EQ(stats[0].token_counts, stats[2].token_counts);
}

TEST(TokenizeCorpus, MarkedRenderingIsLossless) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.7, 5);
  std::istringstream in("ababc ab\nabab ababc c\n");
  std::ostringstream out;
  tok.tokenize_corpus(in, out);
  std::istringstream rendered(out.str());
  std::string line;
  const std::vector<std::string> original = {"ababc ab", "abab ababc c"};
  std::size_t line_no = 0;
  while (std::getline(rendered, line)) {
    // Strip markers and delete in-word spaces: tokens of one word rejoin.
    const auto pieces = split_whitespace(decode_utf8(line));
    std::u32string joined;
    for (const auto& p : pieces) {
      if (p.rfind(U"#", 0) == 0) {
        joined += p.substr(1);
      } else {
        if (!joined.empty()) joined += U' ';
        joined += p;
      }
    }
    EXPECT_EQ(encode_utf8(joined), original[line_no]);
    ++line_no;
  }
  EXPECT_EQ(line_no, 2u);
}

TEST(TokenizeCorpus, BpeRenderingHasNoMarkers) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = Scheme::kBpe;
  cfg.mode = Mode::kUniform;
  cfg.rate = 1.0;
  const StochasticTokenizer tok(tiny_bpe_model(), cfg);
  std::istringstream in("ababc abc\n");
  std::ostringstream out;
  tok.tokenize_corpus(in, out);
  EXPECT_EQ(out.str().find('#'), std::string::npos);
}

TEST(TokenizeCorpus, ErrorsCarryLineNumbersAndPassThrough) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.5);
  std::istringstream in("ababc\nabxba ab\nab\n");
  std::ostringstream out;
  const CorpusStats stats = tok.tokenize_corpus(in, out);
  ASSERT_EQ(stats.errors.size(), 1u);
  EXPECT_EQ(stats.errors[0].line, 2u);
  EXPECT_EQ(stats.errors[0].word, "abxba");
  // The failed word passes through unchanged; the line stays aligned.
  std::istringstream lines(out.str());
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  EXPECT_EQ(l2.rfind("abxba ", 0), 0u);
}

TEST(TokenizeCorpus, ScopeDisablesStochasticSide) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = Scheme::kMaxMatch;
  cfg.mode = Mode::kUniform;
  cfg.rate = 1.0;
  cfg.scope = Scope::kSource;
  cfg.side = Side::kTarget;
  const StochasticTokenizer tok(builtin::six_path_vocab(), cfg);
  std::istringstream in("ababc ababc ababc\n");
  std::ostringstream out;
  const CorpusStats stats = tok.tokenize_corpus(in, out);
  EXPECT_EQ(stats.uniform_sampled, 0u);
  EXPECT_EQ(stats.canonical_words, 3u);
  EXPECT_EQ(out.str(), "ab #ab #c ab #ab #c ab #ab #c\n");
}

TEST(TokenizeCorpus, SummaryCountersAddUp) {
  const StochasticTokenizer tok = make_uniform_maxmatch(0.5, 7);
  std::istringstream in("ababc ab abab\nab ab\n");
  std::ostringstream out;
  const CorpusStats stats = tok.tokenize_corpus(in, out);
  EXPECT_EQ(stats.lines, 2u);
  EXPECT_EQ(stats.words, 5u);
  EXPECT_EQ(stats.uniform_sampled + stats.canonical_words + stats.dropout_encoded,
            stats.words);
  std::uint64_t total = 0;
  for (const auto& [t, c] : stats.token_counts) total += c;
  EXPECT_EQ(total, stats.tokens);
}

}  // namespace
}  // namespace unitok
