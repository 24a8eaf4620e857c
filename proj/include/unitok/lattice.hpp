#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "unitok/bigint.hpp"
#include "unitok/error.hpp"
#include "unitok/maxmatch.hpp"
#include "unitok/rng.hpp"
#include "unitok/token.hpp"

namespace unitok {

inline constexpr std::uint64_t kDefaultMaxRejections = 10'000'000;

// Tokenization lattice of one word: nodes are character positions 0..|w|,
// an edge i -> j exists iff the slice w[i..j) is a vocabulary entry of the
// admissible position class (initial iff i = 0). Source-to-sink paths are
// exactly the valid tokenizations. Built pruned: only co-accessible nodes
// (reachable from the source and with a route to the sink) keep edges.
//
// This is the automaton-transducer composition realized directly as a
// position-indexed DAG; since every edge strictly increases the position,
// acyclicity holds by construction. See docs/lattice.md for the worked
// transducer example.
struct TokenizationLattice {
  std::u32string word;
  std::vector<std::vector<std::uint32_t>> next;  // ascending targets per node
  std::vector<BigInt> suffix_counts;             // paths from node to sink; 0 = pruned
  std::vector<std::uint32_t> live_nodes;         // co-accessible positions, ascending
  BigInt degree_product = 1;  // ∏ out-degree over live non-final nodes
  double p_min = 1.0;         // 1/degree_product, underflows to 0 on huge lattices

  std::uint32_t sink() const { return static_cast<std::uint32_t>(word.size()); }
  std::size_t out_degree(std::uint32_t node) const { return next[node].size(); }
  const BigInt& path_count() const { return suffix_counts[0]; }

  std::u32string edge_surface(std::uint32_t from, std::uint32_t to) const {
    return word.substr(from, to - from);
  }
};

inline TokenizationLattice build_lattice(const std::u32string& word,
                                         const SubwordVocab& vocab) {
  if (word.empty()) throw ConfigError("cannot build a lattice for an empty word");
  const auto n = static_cast<std::uint32_t>(word.size());

  TokenizationLattice lattice;
  lattice.word = word;
  lattice.next.assign(n + 1, {});
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t longest = std::min<std::size_t>(vocab.max_len(), n - i);
    for (std::uint32_t j = i + 1; j <= i + longest; ++j)
      if (vocab.contains(word.substr(i, j - i), i > 0)) lattice.next[i].push_back(j);
  }

  // Reverse-topological suffix counts; a zero count means no route to the
  // sink from that node.
  lattice.suffix_counts.assign(n + 1, 0);
  lattice.suffix_counts[n] = 1;
  for (std::uint32_t i = n; i-- > 0;)
    for (std::uint32_t j : lattice.next[i])
      lattice.suffix_counts[i] += lattice.suffix_counts[j];
  if (lattice.suffix_counts[0] == 0)
    throw UntokenizableError("word '" + encode_utf8(word) +
                                 "' has no tokenization under this vocabulary",
                             encode_utf8(word));

  std::vector<bool> reachable(n + 1, false);
  reachable[0] = true;
  for (std::uint32_t i = 0; i <= n; ++i) {
    if (!reachable[i] || lattice.suffix_counts[i] == 0) continue;
    for (std::uint32_t j : lattice.next[i])
      if (lattice.suffix_counts[j] != 0) reachable[j] = true;
  }

  for (std::uint32_t i = 0; i <= n; ++i) {
    if (!reachable[i] || lattice.suffix_counts[i] == 0) {
      lattice.next[i].clear();
      lattice.suffix_counts[i] = 0;
      continue;
    }
    auto& targets = lattice.next[i];
    targets.erase(std::remove_if(targets.begin(), targets.end(),
                                 [&](std::uint32_t j) {
                                   return lattice.suffix_counts[j] == 0;
                                 }),
                  targets.end());
    lattice.live_nodes.push_back(i);
    if (i != n) {
      lattice.degree_product *= static_cast<std::uint64_t>(targets.size());
      lattice.p_min /= static_cast<double>(targets.size());
    }
  }
  return lattice;
}

inline const BigInt& count_paths(const TokenizationLattice& lattice) {
  return lattice.path_count();
}

// Every source-to-sink path, in lexicographic order of edge choices
// (shorter edge first at each node). Refuses when the count exceeds the
// limit, reporting the true count.
inline std::vector<Tokenization> enumerate_paths(const TokenizationLattice& lattice,
                                                 std::uint64_t limit) {
  if (lattice.path_count() > limit)
    throw LimitError("lattice has " + lattice.path_count().str() +
                         " paths, above the enumeration limit of " + std::to_string(limit),
                     lattice.path_count().str());
  std::vector<Tokenization> out;
  Tokenization current;
  const std::uint32_t sink = lattice.sink();
  auto walk = [&](auto&& self, std::uint32_t node) -> void {
    if (node == sink) {
      out.push_back(current);
      return;
    }
    for (std::uint32_t j : lattice.next[node]) {
      current.push_back(lattice.edge_surface(node, j));
      self(self, j);
      current.pop_back();
    }
  };
  walk(walk, 0);
  return out;
}

// A biased draw plus everything needed to correct it: the proposal
// probability ∏ 1/deg over visited nodes (also kept as the exact integer
// degree product, so the rejection test needs no floating point).
struct SampledPath {
  Tokenization tokenization;
  double proposal_probability = 1.0;
  BigInt visited_degree_product = 1;
};

// Random walk choosing an out-edge uniformly at each node.
inline SampledPath biased_sample(const TokenizationLattice& lattice, Rng& rng) {
  SampledPath sample;
  std::uint32_t node = 0;
  const std::uint32_t sink = lattice.sink();
  while (node != sink) {
    const auto& targets = lattice.next[node];
    const std::uint32_t j =
        targets[static_cast<std::size_t>(bounded_u64(rng, targets.size()))];
    sample.tokenization.push_back(lattice.edge_surface(node, j));
    sample.proposal_probability /= static_cast<double>(targets.size());
    sample.visited_degree_product *= static_cast<std::uint64_t>(targets.size());
    node = j;
  }
  return sample;
}

struct UnbiasedSampleResult {
  Tokenization tokenization;
  std::uint64_t rejections = 0;
};

// Rejection sampling on top of biased draws: a draw of proposal probability
// p is accepted with probability p_min/p, making the marginal over paths
// exactly uniform. p_min/p = D_path/D_all as exact integers, and the
// acceptance variate is m/2^53, so the test below is the exact comparison
// m * D_all <= 2^53 * D_path. Expected draws are 1/(p_min * path_count);
// the guard turns pathological lattices into an error instead of a hang.
inline UnbiasedSampleResult unbiased_sample(const TokenizationLattice& lattice, Rng& rng,
                                            std::uint64_t max_rejections = kDefaultMaxRejections) {
  UnbiasedSampleResult result;
  for (;;) {
    SampledPath draw = biased_sample(lattice, rng);
    const BigInt m = rng() >> 11;
    if (m * lattice.degree_product <= (BigInt(1) << 53) * draw.visited_degree_product) {
      result.tokenization = std::move(draw.tokenization);
      return result;
    }
    if (++result.rejections > max_rejections)
      throw LimitError("unbiased sampling exceeded " + std::to_string(max_rejections) +
                           " rejections",
                       std::to_string(max_rejections));
  }
}

// Uniform big integer in [0, n) from engine output, by rejection on the
// top bits.
inline BigInt uniform_below(Rng& rng, const BigInt& n) {
  if (n <= 1) return 0;
  const unsigned bits = boost::multiprecision::msb(n - 1) + 1;
  for (;;) {
    BigInt v = 0;
    unsigned remaining = bits;
    while (remaining >= 64) {
      v <<= 64;
      v |= rng();
      remaining -= 64;
    }
    if (remaining > 0) {
      v <<= remaining;
      v |= rng() >> (64 - remaining);
    }
    if (v < n) return v;
  }
}

// Rejection-free uniform path sampling: at each node the next edge is
// chosen with probability proportional to the suffix path count of its
// head, which telescopes to exactly 1/path_count per path.
inline Tokenization exact_uniform_sample(const TokenizationLattice& lattice, Rng& rng) {
  Tokenization out;
  std::uint32_t node = 0;
  const std::uint32_t sink = lattice.sink();
  while (node != sink) {
    BigInt r = uniform_below(rng, lattice.suffix_counts[node]);
    for (std::uint32_t j : lattice.next[node]) {
      if (r < lattice.suffix_counts[j]) {
        out.push_back(lattice.edge_surface(node, j));
        node = j;
        break;
      }
      r -= lattice.suffix_counts[j];
    }
  }
  return out;
}

// Debugging dump: header with word and path count, then one line per live
// edge, "from to surface class".
inline std::string dump_lattice(const TokenizationLattice& lattice) {
  std::ostringstream out;
  out << "word " << encode_utf8(lattice.word) << " paths "
      << lattice.path_count().str() << '\n';
  for (std::uint32_t i : lattice.live_nodes)
    for (std::uint32_t j : lattice.next[i])
      out << i << ' ' << j << ' ' << encode_utf8(lattice.edge_surface(i, j)) << ' '
          << (i == 0 ? "initial" : "internal") << '\n';
  return out.str();
}

}  // namespace unitok
