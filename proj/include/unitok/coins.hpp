#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unitok/error.hpp"
#include "unitok/token.hpp"

// Dropout encoders draw keep/drop decisions through a coin callable, so the
// sampling path and the exact-distribution oracle run the identical encoder
// code. The oracle below replays scripted decision prefixes and explores
// both branches of every coin actually consumed, which makes the enumerated
// distribution the distribution of the implementation by construction.

namespace unitok {

// Exhaustive-branching guard for oracle word length.
inline constexpr std::size_t kOracleMaxWordLen = 12;

// Internal guard against combinatorial blowup even under the length guard.
inline constexpr std::size_t kMaxOracleLeaves = std::size_t{1} << 22;

// `run` executes one encoder pass given a coin callable returning true for
// "keep" (Rand() > p). drop_p outside (0,1) collapses to a single
// deterministic pass.
template <class Run>
std::map<Tokenization, double> enumerate_coin_outcomes(Run&& run, double drop_p) {
  std::map<Tokenization, double> out;
  if (drop_p <= 0.0 || drop_p >= 1.0) {
    const bool keep = drop_p <= 0.0;
    auto coin = [keep] { return keep; };
    out[run(coin)] = 1.0;
    return out;
  }
  const double keep_p = 1.0 - drop_p;
  std::vector<std::vector<bool>> pending;
  pending.push_back({});
  std::size_t leaves = 0;
  while (!pending.empty()) {
    const std::vector<bool> prefix = std::move(pending.back());
    pending.pop_back();
    if (++leaves > kMaxOracleLeaves)
      throw LimitError("coin enumeration exceeded the leaf budget",
                       std::to_string(kMaxOracleLeaves));
    std::vector<bool> decisions = prefix;
    std::size_t consumed = 0;
    auto coin = [&] {
      bool kept = true;
      if (consumed < prefix.size()) {
        kept = prefix[consumed];
      } else {
        decisions.push_back(true);
      }
      ++consumed;
      return kept;
    };
    const Tokenization result = run(coin);
    double prob = 1.0;
    for (bool kept : decisions) prob *= kept ? keep_p : drop_p;
    out[result] += prob;
    // Unexplored siblings: flip each defaulted coin to "drop".
    for (std::size_t i = prefix.size(); i < decisions.size(); ++i) {
      std::vector<bool> sibling(decisions.begin(), decisions.begin() + i);
      sibling.push_back(false);
      pending.push_back(std::move(sibling));
    }
  }
  return out;
}

}  // namespace unitok
