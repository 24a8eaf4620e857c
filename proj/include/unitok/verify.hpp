#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "unitok/analysis.hpp"
#include "unitok/bpe.hpp"
#include "unitok/lattice.hpp"
#include "unitok/maxmatch.hpp"
#include "unitok/regularizer.hpp"
#include "unitok/report.hpp"
#include "unitok/rng.hpp"

// Built-in constructed instances and self-checks behind `unitok verify`.
// The instances are the small adversarial tokenizers from the dropout
// non-uniformity analysis plus the five-character lattice example; the
// checks exercise closed forms, sampler uniformity, and cross-oracle
// agreement with fixed seeds.

namespace unitok {
namespace builtin {

// Merges (a,b) > (b,b) > (b,c); abb, bbc, abbc all absent from the vocab.
inline BpeModel nonuniform_bpe_model() {
  MergeList merges;
  merges.merges = {{U"a", U"b"}, {U"b", U"b"}, {U"b", U"c"}};
  return BpeModel({U'a', U'b', U'c'}, std::move(merges));
}

inline std::u32string nonuniform_bpe_word() { return U"abbc"; }

// Vocabulary {a, b, ab, abb} in both classes; ab is a proper prefix of abb.
inline SubwordVocab nonuniform_maxmatch_vocab() {
  const std::vector<std::u32string> entries = {U"a", U"b", U"ab", U"abb"};
  return SubwordVocab(entries, entries);
}

inline std::u32string nonuniform_maxmatch_word() { return U"abb"; }

// Initial {a, b, c, ab}, internal {a, b, c, ab, bc}: the ababc lattice has
// exactly six source-to-sink paths.
inline SubwordVocab six_path_vocab() {
  return SubwordVocab({U"a", U"b", U"c", U"ab"}, {U"a", U"b", U"c", U"ab", U"bc"});
}

inline std::u32string six_path_word() { return U"ababc"; }

// Closed-form dropout probabilities of the abbc instance, keyed by
// tokenization: {p^3, p^2(1-p), p(1-p), (1-p)p, (1-p)^2}.
inline std::map<Tokenization, double> nonuniform_bpe_closed_form(double p) {
  const double q = 1.0 - p;
  return {
      {{U"a", U"b", U"b", U"c"}, p * p * p},
      {{U"a", U"b", U"bc"}, p * p * q},
      {{U"a", U"bb", U"c"}, p * q},
      {{U"ab", U"b", U"c"}, q * p},
      {{U"ab", U"bc"}, q * q},
  };
}

// Random small MaxMatch instance for cross-oracle checks; path count kept
// within [min_paths, max_paths] by redrawing.
struct RandomInstance {
  SubwordVocab vocab;
  std::u32string word;
};

inline RandomInstance random_instance(Rng& rng, unsigned max_word_len = 10,
                                      unsigned max_extra_entries = 11,
                                      const BigInt& min_paths = 1,
                                      const BigInt& max_paths = BigInt(1) << 62) {
  static const std::u32string kLetters = U"abc";
  for (;;) {
    std::vector<std::u32string> initial, internal;
    for (char32_t c : kLetters) {
      initial.emplace_back(1, c);
      internal.emplace_back(1, c);
    }
    const unsigned extra = static_cast<unsigned>(bounded_u64(rng, max_extra_entries + 1));
    for (unsigned k = 0; k < extra; ++k) {
      const std::size_t len = 2 + bounded_u64(rng, 3);
      std::u32string surface;
      for (std::size_t i = 0; i < len; ++i)
        surface += kLetters[bounded_u64(rng, kLetters.size())];
      (bounded_u64(rng, 2) == 0 ? initial : internal).push_back(surface);
    }
    const std::size_t len = 1 + bounded_u64(rng, max_word_len);
    std::u32string word;
    for (std::size_t i = 0; i < len; ++i)
      word += kLetters[bounded_u64(rng, kLetters.size())];
    SubwordVocab vocab(std::move(initial), std::move(internal));
    TokenizationLattice lattice = build_lattice(word, vocab);
    if (lattice.path_count() < min_paths || lattice.path_count() > max_paths) continue;
    return {std::move(vocab), std::move(word)};
  }
}

}  // namespace builtin

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline double tv_from_counts(const std::map<Tokenization, std::uint64_t>& counts,
                             std::uint64_t n, double uniform_mass, std::size_t support) {
  double l1 = 0.0;
  std::size_t seen = 0;
  for (const auto& [t, c] : counts) {
    l1 += std::abs(static_cast<double>(c) / n - uniform_mass);
    ++seen;
  }
  l1 += uniform_mass * static_cast<double>(support - seen);  // unobserved paths
  return 0.5 * l1;
}

}  // namespace detail

inline std::vector<CheckResult> run_builtin_checks(std::uint64_t seed = kDefaultSeed) {
  std::vector<CheckResult> results;
  const auto add = [&](std::string name, bool pass, std::string detail) {
    results.push_back({std::move(name), pass, std::move(detail)});
  };

  // 1. Closed-form dropout distribution of the BPE instance.
  {
    const BpeModel model = builtin::nonuniform_bpe_model();
    const std::u32string word = builtin::nonuniform_bpe_word();
    double worst = 0.0;
    for (double p : {0.1, 0.3, 0.5}) {
      const DistributionReport dist = exact_bpe_dropout_dist(word, model, p);
      const auto expected = builtin::nonuniform_bpe_closed_form(p);
      if (dist.rows.size() != expected.size()) {
        worst = 1.0;
        break;
      }
      for (const auto& [t, prob] : expected)
        worst = std::max(worst, std::abs(dist.probability_of(t) - prob));
      worst = std::max(worst, std::abs(dist.total() - 1.0));
    }
    std::ostringstream msg;
    msg << "max deviation from closed form " << worst;
    add("bpe-dropout-closed-form", worst <= 1e-12, msg.str());
  }

  // 2. BPE dropout non-uniform across the whole grid.
  {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
    const LemmaGridReport report = lemma_grid_check(
        builtin::nonuniform_bpe_model(), builtin::nonuniform_bpe_word(), grid);
    double min_spread = 1.0;
    for (const auto& pt : report.points) min_spread = std::min(min_spread, pt.spread());
    std::ostringstream msg;
    msg << "min spread over grid " << min_spread;
    add("bpe-dropout-nonuniform-grid",
        report.preconditions_ok() && report.non_uniform_everywhere, msg.str());
  }

  // 3. MaxMatch dropout non-uniform; canonical probability exactly 1-p.
  {
    const SubwordVocab vocab = builtin::nonuniform_maxmatch_vocab();
    const std::u32string word = builtin::nonuniform_maxmatch_word();
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
    const LemmaGridReport report = lemma_grid_check(vocab, word, grid);
    double worst_canonical = 0.0;
    for (double p : grid) {
      const DistributionReport dist = exact_maxmatch_dropout_dist(word, vocab, p);
      worst_canonical =
          std::max(worst_canonical, std::abs(dist.probability_of({word}) - (1.0 - p)));
    }
    std::ostringstream msg;
    msg << "canonical-probability deviation from (1-p): " << worst_canonical;
    add("maxmatch-dropout-nonuniform-grid",
        report.preconditions_ok() && report.non_uniform_everywhere &&
            worst_canonical <= 1e-12,
        msg.str());
  }

  // 4. Uniform samplers on the six-path lattice.
  {
    const TokenizationLattice lattice =
        build_lattice(builtin::six_path_word(), builtin::six_path_vocab());
    bool pass = lattice.path_count() == 6;
    Rng rng(mix64(seed));
    std::map<Tokenization, std::uint64_t> unbiased_counts, exact_counts;
    const std::uint64_t n = 60'000;
    for (std::uint64_t i = 0; i < n; ++i) {
      unbiased_counts[unbiased_sample(lattice, rng).tokenization] += 1;
      exact_counts[exact_uniform_sample(lattice, rng)] += 1;
    }
    const double tv_unbiased = detail::tv_from_counts(unbiased_counts, n, 1.0 / 6, 6);
    const double tv_exact = detail::tv_from_counts(exact_counts, n, 1.0 / 6, 6);
    std::ostringstream msg;
    msg << "path count " << lattice.path_count().str() << ", TV(unbiased, uniform) "
           << tv_unbiased << ", TV(exact, uniform) " << tv_exact;
    add("uniform-sampler-six-path", pass && tv_unbiased < 0.02 && tv_exact < 0.02,
        msg.str());
  }

  // 5. Rejection acceptance bound and cross-oracle agreement on random
  //    lattices.
  {
    Rng rng(mix64(seed ^ 0x5ca1ab1eull));
    bool bound_ok = true;
    double worst_tv = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto inst = builtin::random_instance(rng, 8, 8, 2, 40);
      const TokenizationLattice lattice = build_lattice(inst.word, inst.vocab);
      for (const auto& path : enumerate_paths(lattice, 1'000'000)) {
        BigInt visited = 1;
        std::uint32_t node = 0;
        for (const auto& token : path) {
          visited *= static_cast<std::uint64_t>(lattice.out_degree(node));
          node += static_cast<std::uint32_t>(token.size());
        }
        if (visited > lattice.degree_product) bound_ok = false;  // p_min > proposal
      }
      std::map<Tokenization, std::uint64_t> a, b;
      const std::uint64_t n = 20'000;
      for (std::uint64_t i = 0; i < n; ++i) {
        a[unbiased_sample(lattice, rng).tokenization] += 1;
        b[exact_uniform_sample(lattice, rng)] += 1;
      }
      std::map<Tokenization, double> diff;
      for (const auto& [t, c] : a) diff[t] += static_cast<double>(c) / n;
      for (const auto& [t, c] : b) diff[t] -= static_cast<double>(c) / n;
      double l1 = 0.0;
      for (const auto& [t, d] : diff) l1 += std::abs(d);
      worst_tv = std::max(worst_tv, 0.5 * l1);
    }
    std::ostringstream msg;
    msg << "worst TV(unbiased, exact) " << worst_tv;
    add("rejection-cross-oracle", bound_ok && worst_tv < 0.03, msg.str());
  }

  // 6. Path-count agreement with plain enumeration on random lattices.
  {
    Rng rng(mix64(seed ^ 0xfacadeull));
    bool pass = true;
    for (int k = 0; k < 40 && pass; ++k) {
      const auto inst = builtin::random_instance(rng, 9, 10, 1, 5'000);
      const TokenizationLattice lattice = build_lattice(inst.word, inst.vocab);
      const auto paths = enumerate_paths(lattice, 5'000);
      if (BigInt(paths.size()) != lattice.path_count()) pass = false;
    }
    add("path-count-vs-enumeration", pass, "40 random instances");
  }

  // 7. Degenerate dropout rates.
  {
    const BpeModel model = builtin::nonuniform_bpe_model();
    Rng r1(seed), r2(seed + 1);
    const std::u32string word = builtin::nonuniform_bpe_word();
    const bool det = bpe_encode(word, model, 0.0, r1) == bpe_encode(word, model, 0.0, r2);
    Rng r3(seed);
    const Tokenization chars = bpe_encode(word, model, 1.0, r3);
    bool all_single = chars.size() == word.size();
    const SubwordVocab vocab = builtin::six_path_vocab();
    Rng r4(seed), r5(seed + 7);
    const bool det_mm = maxmatch_encode(builtin::six_path_word(), vocab, 0.0, r4) ==
                        maxmatch_encode(builtin::six_path_word(), vocab, 0.0, r5);
    add("degenerate-dropout-rates", det && all_single && det_mm,
        "p=0 deterministic, p=1 single characters");
  }

  // 8. Seeded reproducibility of the stochastic tokenizer.
  {
    StochasticTokenizerConfig cfg;
    cfg.scheme = Scheme::kMaxMatch;
    cfg.mode = Mode::kUniform;
    cfg.rate = 1.0;
    cfg.seed = seed;
    const StochasticTokenizer tok(builtin::six_path_vocab(), cfg);
    const std::vector<std::u32string> sentence = {U"ababc", U"ab", U"ababc"};
    const auto first = tok.tokenize_sentence(sentence, 3);
    const auto second = tok.tokenize_sentence(sentence, 3);
    add("seeded-reproducibility", first == second, "same line, same seeds, same output");
  }

  return results;
}

}  // namespace unitok
