#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "unitok/bpe.hpp"
#include "unitok/corpus.hpp"
#include "unitok/error.hpp"
#include "unitok/lattice.hpp"
#include "unitok/maxmatch.hpp"
#include "unitok/rng.hpp"
#include "unitok/token.hpp"

namespace unitok {

enum class Scheme { kBpe, kMaxMatch };
enum class Mode { kDropout, kUniform };
enum class Side { kSource, kTarget };
enum class Scope { kSource, kTarget, kBoth };

struct StochasticTokenizerConfig {
  Scheme scheme = Scheme::kBpe;
  Mode mode = Mode::kDropout;
  double rate = 0.0;
  std::uint64_t seed = kDefaultSeed;
  // Which sides of a parallel corpus receive stochastic tokenization, and
  // which side the stream at hand is. A stream outside scope falls back to
  // the deterministic base tokenizer.
  Scope scope = Scope::kBoth;
  Side side = Side::kSource;

  bool stochastic_active() const {
    return scope == Scope::kBoth || (scope == Scope::kSource && side == Side::kSource) ||
           (scope == Scope::kTarget && side == Side::kTarget);
  }

  void validate() const {
    if (!(rate >= 0.0 && rate <= 1.0))
      throw ConfigError("sampling rate must lie in [0, 1]");
  }
};

enum class WordOutcome { kCanonical, kUniformSampled, kDropoutEncoded };

struct CorpusError {
  std::uint64_t line = 0;  // 1-based
  std::string word;
  std::string message;
};

struct CorpusStats {
  std::uint64_t lines = 0;
  std::uint64_t words = 0;
  std::uint64_t tokens = 0;
  std::uint64_t uniform_sampled = 0;
  std::uint64_t dropout_encoded = 0;
  std::uint64_t canonical_words = 0;
  std::unordered_map<std::string, std::uint64_t> token_counts;
  std::vector<CorpusError> errors;

  std::size_t type_count() const { return token_counts.size(); }
};

// Per-word stochastic tokenizer: with probability `rate` a word is
// tokenized by a uniform draw over its lattice paths (uniform mode) or the
// base scheme's dropout encode is applied with `rate` as its dropout
// probability (dropout mode); otherwise the deterministic base tokenization
// is emitted. Immutable after construction and shareable across threads;
// every word draws from its own engine seeded by
// derive_seed(master, line_index, word_index).
class StochasticTokenizer {
 public:
  StochasticTokenizer(BpeModel model, StochasticTokenizerConfig config)
      : config_(std::move(config)), bpe_(std::move(model)) {
    if (config_.scheme != Scheme::kBpe)
      throw ConfigError("BPE model supplied for a non-BPE scheme");
    config_.validate();
    if (config_.mode == Mode::kUniform) vocab_ = derive_marked_vocab(bpe_);
  }

  StochasticTokenizer(SubwordVocab vocab, StochasticTokenizerConfig config)
      : config_(std::move(config)), vocab_(std::move(vocab)) {
    if (config_.scheme != Scheme::kMaxMatch)
      throw ConfigError("subword vocabulary supplied for a non-MaxMatch scheme");
    config_.validate();
  }

  const StochasticTokenizerConfig& config() const { return config_; }

  // Marker used when rendering output; BPE output is unmarked.
  std::u32string render_marker() const {
    return config_.scheme == Scheme::kMaxMatch ? vocab_.marker() : std::u32string();
  }

  Tokenization canonical(const std::u32string& word) const {
    return config_.scheme == Scheme::kBpe ? bpe_encode_deterministic(word, bpe_)
                                          : maxmatch_encode_deterministic(word, vocab_);
  }

  Tokenization tokenize_word(const std::u32string& word, Rng& rng,
                             WordOutcome* outcome = nullptr) const {
    const auto set_outcome = [&](WordOutcome o) {
      if (outcome) *outcome = o;
    };
    if (!config_.stochastic_active() || config_.rate <= 0.0) {
      set_outcome(WordOutcome::kCanonical);
      return canonical(word);
    }
    if (config_.mode == Mode::kDropout) {
      set_outcome(WordOutcome::kDropoutEncoded);
      return config_.scheme == Scheme::kBpe
                 ? bpe_encode(word, bpe_, config_.rate, rng)
                 : maxmatch_encode(word, vocab_, config_.rate, rng);
    }
    // Uniform mode. The sampled path may coincide with the canonical
    // tokenization; no resampling.
    if (unit_double(rng) < config_.rate) {
      set_outcome(WordOutcome::kUniformSampled);
      return exact_uniform_sample(*lattice_for(word), rng);
    }
    set_outcome(WordOutcome::kCanonical);
    return canonical(word);
  }

  // line_index is 0-based and feeds per-word seed derivation only.
  std::vector<Tokenization> tokenize_sentence(const std::vector<std::u32string>& words,
                                              std::uint64_t line_index = 0,
                                              CorpusStats* stats = nullptr) const {
    std::vector<Tokenization> out;
    out.reserve(words.size());
    for (std::size_t k = 0; k < words.size(); ++k) {
      Rng rng(derive_seed(config_.seed, line_index, k));
      WordOutcome outcome = WordOutcome::kCanonical;
      out.push_back(tokenize_word(words[k], rng, &outcome));
      if (stats) bump(*stats, outcome);
    }
    return out;
  }

  // Line-oriented corpus tokenization: each output line is the
  // space-joined rendering of the input line's word tokenizations.
  // Untokenizable words pass through unchanged and are recorded with their
  // 1-based line number. Output and statistics are byte-identical for any
  // worker count.
  CorpusStats tokenize_corpus(std::istream& in, std::ostream& out, int workers = 1) const {
    if (workers < 1) throw ConfigError("worker count must be >= 1");
    CorpusStats stats;
    std::vector<std::string> batch;
    std::uint64_t batch_base = 0;  // 0-based index of batch.front()
    const std::size_t batch_size = static_cast<std::size_t>(workers) * 64;

    std::string line;
    while (std::getline(in, line)) {
      batch.push_back(std::move(line));
      if (batch.size() >= batch_size) {
        flush_batch(batch, batch_base, workers, out, stats);
        batch_base += batch.size();
        batch.clear();
      }
    }
    if (!batch.empty()) flush_batch(batch, batch_base, workers, out, stats);
    return stats;
  }

 private:
  struct LineResult {
    std::string rendered;
    std::vector<std::string> tokens;
    std::uint64_t words = 0;
    std::uint64_t uniform_sampled = 0;
    std::uint64_t dropout_encoded = 0;
    std::uint64_t canonical_words = 0;
    std::vector<CorpusError> errors;
  };

  static void bump(CorpusStats& stats, WordOutcome outcome) {
    stats.words += 1;
    switch (outcome) {
      case WordOutcome::kCanonical: stats.canonical_words += 1; break;
      case WordOutcome::kUniformSampled: stats.uniform_sampled += 1; break;
      case WordOutcome::kDropoutEncoded: stats.dropout_encoded += 1; break;
    }
  }

  LineResult process_line(const std::string& raw, std::uint64_t line_index) const {
    LineResult result;
    const std::u32string marker = render_marker();
    std::vector<std::u32string> words;
    try {
      words = split_whitespace(decode_utf8(raw));
    } catch (const Utf8Error& e) {
      result.errors.push_back({line_index + 1, "", e.what()});
      result.rendered = raw;
      return result;
    }
    std::string rendered;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k > 0) rendered += ' ';
      result.words += 1;
      Rng rng(derive_seed(config_.seed, line_index, k));
      try {
        WordOutcome outcome = WordOutcome::kCanonical;
        const Tokenization tokens = tokenize_word(words[k], rng, &outcome);
        switch (outcome) {
          case WordOutcome::kCanonical: result.canonical_words += 1; break;
          case WordOutcome::kUniformSampled: result.uniform_sampled += 1; break;
          case WordOutcome::kDropoutEncoded: result.dropout_encoded += 1; break;
        }
        for (std::size_t t = 0; t < tokens.size(); ++t) {
          std::string piece;
          if (t > 0 && !marker.empty()) piece += encode_utf8(marker);
          piece += encode_utf8(tokens[t]);
          if (t > 0) rendered += ' ';
          rendered += piece;
          result.tokens.push_back(std::move(piece));
        }
      } catch (const Error& e) {
        result.errors.push_back({line_index + 1, encode_utf8(words[k]), e.what()});
        rendered += encode_utf8(words[k]);  // pass through, keep the line aligned
      }
    }
    result.rendered = std::move(rendered);
    return result;
  }

  void flush_batch(const std::vector<std::string>& batch, std::uint64_t batch_base,
                   int workers, std::ostream& out, CorpusStats& stats) const {
    std::vector<LineResult> results(batch.size());
    if (workers == 1 || batch.size() == 1) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        results[i] = process_line(batch[i], batch_base + i);
    } else {
      std::atomic<std::size_t> cursor{0};
      auto work = [&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= batch.size()) return;
          results[i] = process_line(batch[i], batch_base + i);
        }
      };
      std::vector<std::thread> pool;
      const int spawned = std::min<int>(workers, static_cast<int>(batch.size()));
      pool.reserve(spawned);
      for (int t = 0; t < spawned; ++t) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    // Aggregation stays in line order, so stats are worker-count invariant.
    for (auto& r : results) {
      out << r.rendered << '\n';
      stats.lines += 1;
      stats.words += r.words;
      stats.tokens += r.tokens.size();
      stats.uniform_sampled += r.uniform_sampled;
      stats.dropout_encoded += r.dropout_encoded;
      stats.canonical_words += r.canonical_words;
      for (auto& tok : r.tokens) stats.token_counts[tok] += 1;
      for (auto& e : r.errors) stats.errors.push_back(std::move(e));
    }
  }

  std::shared_ptr<const TokenizationLattice> lattice_for(const std::u32string& word) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = lattice_cache_.find(word);
    if (it != lattice_cache_.end()) return it->second;
    auto lattice = std::make_shared<const TokenizationLattice>(build_lattice(word, vocab_));
    lattice_cache_.emplace(word, lattice);
    return lattice;
  }

  StochasticTokenizerConfig config_;
  BpeModel bpe_;
  SubwordVocab vocab_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::u32string, std::shared_ptr<const TokenizationLattice>>
      lattice_cache_;
};

}  // namespace unitok
