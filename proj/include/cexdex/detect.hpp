#pragma once

#include "cexdex/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cexdex::detect {

/// Residual net flows below this many token units are rounding dust.
inline const Decimal kDustThreshold{"1e-12"};

enum class Heuristic { Private = 0, FirstInPool, NotAtomicMev, NotOfaBackrun, NotRouterOrBot, TwoListedTokens };
inline constexpr std::size_t kHeuristicCount = 6;

/// Short column names H1..H6.
const char* heuristic_name(Heuristic h);

struct DetectionVerdict {
  std::string tx_hash;
  bool passed = false;
  std::array<bool, kHeuristicCount> per_heuristic{};
  std::vector<std::string> failure_reasons;

  bool heuristic(Heuristic h) const { return per_heuristic[static_cast<std::size_t>(h)]; }
};

/// Signed net flow per token: received minus spent across every swap.
using NetFlows = std::map<Address, Decimal>;

struct EffectivePair {
  Address token_bought;
  Decimal amount_bought;
  Address token_sold;
  Decimal amount_sold;
};

NetFlows aggregate_swaps(const RawTransaction& tx);

/// Succeeds iff exactly one token is net-received and exactly one is
/// net-spent; anything else (atomic loop, three-legged residual) is
/// NotTwoSided and yields nullopt.
std::optional<EffectivePair> effective_pair(const NetFlows& net);

DetectionVerdict apply_heuristics(const RawTransaction& tx, const TokenRegistry& registry);

struct DetectionResult {
  std::vector<ArbTrade> trades;
  std::vector<DetectionVerdict> verdicts;
};

/// Label used for passing transactions whose contract is not in the label file.
std::string unlabeled_searcher(const Address& contract);

/// Verdict for every input transaction and an ArbTrade for every passing
/// one, both in input order. Parallel over transactions.
DetectionResult detect_all(const std::vector<RawTransaction>& txs, const TokenRegistry& registry,
                           const SearcherLabels& labels);

namespace serial {
DetectionResult detect_all(const std::vector<RawTransaction>& txs, const TokenRegistry& registry,
                           const SearcherLabels& labels);
}  // namespace serial

}  // namespace cexdex::detect
