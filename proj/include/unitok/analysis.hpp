#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "unitok/bigint.hpp"
#include "unitok/bpe.hpp"
#include "unitok/error.hpp"
#include "unitok/maxmatch.hpp"
#include "unitok/report.hpp"
#include "unitok/rng.hpp"
#include "unitok/token.hpp"

namespace unitok {

using TokenizerClosure = std::function<Tokenization(Rng&)>;

// Zero-probability rows for unobserved paths are included only when the
// full support is known and no larger than this.
inline constexpr std::size_t kReportSupportLimit = 10'000;

inline DistributionReport empirical_distribution(const std::u32string& word,
                                                 const TokenizerClosure& sampler,
                                                 std::uint64_t samples, std::uint64_t seed,
                                                 Tokenization canonical,
                                                 const std::vector<Tokenization>* support = nullptr) {
  if (samples < 1) throw ConfigError("sample count must be >= 1");
  Rng rng(seed);
  std::map<Tokenization, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < samples; ++i) counts[sampler(rng)] += 1;

  DistributionReport report;
  report.word = word;
  report.kind = DistributionReport::Kind::kEmpirical;
  report.sample_count = samples;
  report.seed = seed;
  report.canonical = std::move(canonical);
  for (const auto& [t, c] : counts)
    report.rows.push_back({t, static_cast<double>(c) / static_cast<double>(samples),
                           t == report.canonical});
  if (support && support->size() <= kReportSupportLimit) {
    for (const auto& t : *support)
      if (!counts.count(t)) report.rows.push_back({t, 0.0, t == report.canonical});
  }
  sort_rows(report.rows);
  return report;
}

// Mean number of distinct tokenizations observed among N samples, for each
// N in the grid, averaged over `repeats` independent seeded streams.
inline std::vector<std::pair<std::uint64_t, double>> unique_count_curve(
    const TokenizerClosure& sampler, const std::vector<std::uint64_t>& sample_grid,
    std::uint32_t repeats, std::uint64_t seed) {
  if (sample_grid.empty() || repeats == 0)
    throw ConfigError("unique-count curve needs a sample grid and repeats >= 1");
  for (std::size_t i = 1; i < sample_grid.size(); ++i)
    if (sample_grid[i] <= sample_grid[i - 1])
      throw ConfigError("sample grid must be strictly ascending");

  std::vector<double> sums(sample_grid.size(), 0.0);
  for (std::uint32_t r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, r, 0));
    std::set<Tokenization> seen;
    std::uint64_t drawn = 0;
    for (std::size_t g = 0; g < sample_grid.size(); ++g) {
      while (drawn < sample_grid[g]) {
        seen.insert(sampler(rng));
        ++drawn;
      }
      sums[g] += static_cast<double>(seen.size());
    }
  }
  std::vector<std::pair<std::uint64_t, double>> curve;
  curve.reserve(sample_grid.size());
  for (std::size_t g = 0; g < sample_grid.size(); ++g)
    curve.emplace_back(sample_grid[g], sums[g] / repeats);
  return curve;
}

// Shannon efficiency of the distribution with the canonical row removed and
// the remainder renormalized, relative to the T-1 non-canonical paths.
// Zero non-canonical mass is defined as 0.
inline double shannon_efficiency_excluding_canonical(const DistributionReport& report,
                                                     const BigInt& path_count) {
  if (path_count < 2) throw ConfigError("shannon efficiency needs at least 2 paths");
  double mass = 0.0;
  for (const auto& r : report.rows)
    if (!r.is_canonical) mass += r.probability;
  if (mass <= 0.0) return 0.0;
  double entropy = 0.0;
  for (const auto& r : report.rows) {
    if (r.is_canonical || r.probability <= 0.0) continue;
    const double q = r.probability / mass;
    entropy -= q * std::log2(q);
  }
  const double denom = std::log2(static_cast<double>(path_count - 1));
  if (denom <= 0.0) return 0.0;  // T == 2: one non-canonical path, entropy 0
  const double efficiency = entropy / denom;
  return efficiency < 0.0 ? 0.0 : (efficiency > 1.0 ? 1.0 : efficiency);
}

struct EfficiencyReport {
  double alpha = 1.0;
  std::uint64_t vocab_size = 0;
  double entropy_bits = 0.0;
  double efficiency = 0.0;
};

// Rényi efficiency of a unigram token distribution:
// H_alpha(p) / log2(vocab_size), with the Shannon limit at alpha = 1.
inline EfficiencyReport renyi_efficiency(
    const std::unordered_map<std::string, std::uint64_t>& token_counts,
    std::uint64_t vocab_size, double alpha) {
  if (token_counts.empty()) throw ConfigError("empty token counts");
  if (vocab_size < 2) throw ConfigError("vocab size must be >= 2");
  if (alpha < 0.0) throw ConfigError("Rényi order must be >= 0");

  std::uint64_t total = 0;
  for (const auto& [t, c] : token_counts) total += c;
  if (total == 0) throw ConfigError("token counts sum to zero");

  double entropy = 0.0;
  if (std::abs(alpha - 1.0) < 1e-9) {
    for (const auto& [t, c] : token_counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(total);
      entropy -= p * std::log2(p);
    }
  } else {
    double power_sum = 0.0;
    for (const auto& [t, c] : token_counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / static_cast<double>(total);
      power_sum += std::pow(p, alpha);
    }
    entropy = std::log2(power_sum) / (1.0 - alpha);
  }

  EfficiencyReport report;
  report.alpha = alpha;
  report.vocab_size = vocab_size;
  report.entropy_bits = entropy;
  report.efficiency = entropy / std::log2(static_cast<double>(vocab_size));
  return report;
}

// --- lemma grid checks ----------------------------------------------------

struct LemmaGridPoint {
  double p = 0.0;
  double max_probability = 0.0;
  double min_probability = 0.0;
  std::size_t support = 0;

  double spread() const { return max_probability - min_probability; }
};

struct LemmaGridReport {
  static constexpr double kSpreadTolerance = 1e-9;

  std::vector<std::string> precondition_failures;
  std::vector<LemmaGridPoint> points;
  bool degenerate = false;  // single tokenization; outside lemma scope
  bool non_uniform_everywhere = false;

  bool preconditions_ok() const { return precondition_failures.empty(); }
};

namespace detail {

inline void eval_grid(LemmaGridReport& report, const std::vector<double>& p_grid,
                      const std::function<DistributionReport(double)>& exact_dist) {
  bool all_spread = true;
  for (double p : p_grid) {
    const DistributionReport dist = exact_dist(p);
    LemmaGridPoint point;
    point.p = p;
    point.support = dist.rows.size();
    point.max_probability = dist.rows.empty() ? 0.0 : dist.rows.front().probability;
    point.min_probability = point.max_probability;
    for (const auto& r : dist.rows) {
      point.max_probability = std::max(point.max_probability, r.probability);
      point.min_probability = std::min(point.min_probability, r.probability);
    }
    if (point.support <= 1) report.degenerate = true;
    if (point.spread() <= LemmaGridReport::kSpreadTolerance) all_spread = false;
    report.points.push_back(point);
  }
  report.non_uniform_everywhere =
      !report.degenerate && !report.points.empty() && all_spread;
}

}  // namespace detail

// BPE instance check: requires merges (x,y) > (y,y) > (y,z) in priority
// order with xyy, yyz, xyyz all absent from the vocabulary, and the word
// equal to xyyz. Reports each failing clause instead of guessing.
inline LemmaGridReport lemma_grid_check(const BpeModel& model, const std::u32string& word,
                                        const std::vector<double>& p_grid) {
  LemmaGridReport report;
  if (exact_bpe_dropout_dist(word, model, 0.5).rows.size() <= 1) {
    report.degenerate = true;
    report.precondition_failures.push_back(
        "word has a single tokenization (trivially uniform, outside lemma scope)");
    return report;
  }
  const auto& merges = model.merges();
  bool found = false;
  std::string nearest_failure;
  for (std::size_t r2 = 0; r2 < merges.size() && !found; ++r2) {
    if (merges[r2].first != merges[r2].second) continue;
    const std::u32string& y = merges[r2].first;
    for (std::size_t r1 = 0; r1 < r2 && !found; ++r1) {
      if (merges[r1].second != y) continue;
      const std::u32string& x = merges[r1].first;
      for (std::size_t r3 = r2 + 1; r3 < merges.size() && !found; ++r3) {
        if (merges[r3].first != y) continue;
        const std::u32string& z = merges[r3].second;
        if (word != x + y + y + z) {
          nearest_failure = "word does not equal xyyz for the matched merge triple";
          continue;
        }
        if (model.vocab().count(x + y + y) || model.vocab().count(y + y + z) ||
            model.vocab().count(x + y + y + z)) {
          nearest_failure = "one of xyy, yyz, xyyz is present in the vocabulary";
          continue;
        }
        found = true;
      }
    }
  }
  if (!found) {
    report.precondition_failures.push_back(
        nearest_failure.empty()
            ? "no merge triple (x,y) > (y,y) > (y,z) exists in the merge list"
            : nearest_failure);
    return report;
  }
  detail::eval_grid(report, p_grid,
                    [&](double p) { return exact_bpe_dropout_dist(word, model, p); });
  return report;
}

// MaxMatch instance check: alphabet singles present in both position
// classes, the word itself a vocabulary entry, and some multi-character
// proper prefix of the word also a vocabulary entry.
inline LemmaGridReport lemma_grid_check(const SubwordVocab& vocab,
                                        const std::u32string& word,
                                        const std::vector<double>& p_grid) {
  LemmaGridReport report;
  if (exact_maxmatch_dropout_dist(word, vocab, 0.5).rows.size() <= 1) {
    report.degenerate = true;
    report.precondition_failures.push_back(
        "word has a single tokenization (trivially uniform, outside lemma scope)");
    return report;
  }
  for (char32_t c : vocab.alphabet()) {
    const std::u32string single(1, c);
    if (!vocab.contains(single, false) || !vocab.contains(single, true)) {
      report.precondition_failures.push_back(
          "alphabet character '" + encode_utf8(single) +
          "' missing from a position class (needs both)");
    }
  }
  if (!vocab.contains(word, false))
    report.precondition_failures.push_back("word is not itself a vocabulary entry");
  bool has_prefix = false;
  for (std::size_t len = 2; len < word.size(); ++len)
    if (vocab.contains(word.substr(0, len), false)) has_prefix = true;
  if (!has_prefix)
    report.precondition_failures.push_back(
        "no multi-character proper prefix of the word is a vocabulary entry");
  if (!report.preconditions_ok()) return report;
  detail::eval_grid(report, p_grid,
                    [&](double p) { return exact_maxmatch_dropout_dist(word, vocab, p); });
  return report;
}

}  // namespace unitok
